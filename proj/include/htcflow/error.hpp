#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace htc {

/// Failure categories shared by every module. The CLI maps these onto exit codes.
enum class Errc {
  invalid_argument,
  malformed_header,
  malformed_row,
  node_count_mismatch,
  non_finite_value,
  unknown_node,
  duplicate_node,
  coordinate_mismatch,
  off_plane,
  duplicate_centers,
  singular_system,
  rank_deficient,
  budget_exceeded,
  io,
  missing_input,
  task_failed,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace htc
