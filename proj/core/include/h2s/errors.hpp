#ifndef H2S_ERRORS_HPP
#define H2S_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace h2s {

/// Invalid caller-supplied value (bad config, empty group, layout mismatch).
class input_error : public std::runtime_error {
public:
  explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or corrupted on-disk artifact (bank files, CSV payloads).
class format_error : public std::runtime_error {
public:
  explicit format_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Out-of-domain argument to a density or sampler (non-positive variance etc).
class domain_error : public std::domain_error {
public:
  explicit domain_error(const std::string& msg) : std::domain_error(msg) {}
};

/// Non-finite value produced where the algorithm guarantees finiteness.
class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace h2s

#endif
