#include "h2s/log.hpp"

#include <cstdio>

namespace h2s {

void warn(const std::string& message) {
  std::fprintf(stderr, "h2s: warning: %s\n", message.c_str());
}

}  // namespace h2s
