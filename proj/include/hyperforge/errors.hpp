#pragma once

#include <stdexcept>
#include <string>

namespace hf {

// Error taxonomy shared by all modules; the CLI maps these onto exit codes.
//
//   structural_error    -> malformed input shapes/degrees/JSON      (exit 2)
//   domain_error        -> input outside an operation's domain      (exit 2)
//   invariant_violation -> two routes that must agree disagreed;
//                          this is a bug in the toolkit, never a
//                          property of the input                    (exit 3)

struct structural_error : std::runtime_error {
  explicit structural_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct domain_error : std::runtime_error {
  explicit domain_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct invariant_violation : std::runtime_error {
  explicit invariant_violation(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hf
