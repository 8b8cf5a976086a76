#ifndef H2S_LOG_HPP
#define H2S_LOG_HPP

#include <string>

namespace h2s {

/// Non-fatal diagnostic to stderr ("h2s: warning: ...").
void warn(const std::string& message);

}  // namespace h2s

#endif
