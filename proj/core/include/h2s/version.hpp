#ifndef H2S_VERSION_HPP
#define H2S_VERSION_HPP

namespace h2s {

inline const char* version_string() { return "0.1.0"; }

}  // namespace h2s

#endif
