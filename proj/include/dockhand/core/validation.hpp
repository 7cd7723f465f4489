#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dockhand/core/types.hpp"

namespace dockhand::core {

enum class RejectReason { not_docker, subcommand_denied, forbidden_character, too_long, empty };

std::string_view to_string(RejectReason reason);

struct ValidationPolicy {
  std::set<std::string> allowlisted_subcommands;
  std::string forbidden_characters;
  std::size_t max_length = 4096;

  static ValidationPolicy defaults();
};

class ValidationVerdict {
 public:
  static ValidationVerdict accept(std::string normalized) {
    ValidationVerdict v;
    v.accepted_ = true;
    v.normalized_ = std::move(normalized);
    return v;
  }
  static ValidationVerdict reject(RejectReason reason) {
    ValidationVerdict v;
    v.reason_ = reason;
    return v;
  }

  bool accepted() const { return accepted_; }
  explicit operator bool() const { return accepted_; }
  const std::string& normalized() const { return normalized_; }
  RejectReason reason() const { return reason_; }

 private:
  bool accepted_ = false;
  std::string normalized_;
  RejectReason reason_ = RejectReason::empty;
};

/// Checks an untrusted command line against the policy.
///
/// Whitespace outside quotes is trimmed and collapsed to single spaces; quoted
/// segments ('...' or "...") are kept verbatim so format templates may carry
/// TAB characters. An unterminated quote is reported as forbidden_character.
/// Checks run in this order: empty, too_long, forbidden_character, not_docker,
/// subcommand_denied.
ValidationVerdict validate_command(std::string_view raw,
                                   const ValidationPolicy& policy = ValidationPolicy::defaults());

/// Splits an accepted command into its argument vector with quotes removed.
std::vector<std::string> split_command(std::string_view normalized);

/// Single-quotes a word for a POSIX shell.
std::string shell_quote(std::string_view word);

/// Request for an accepted verdict; a rejected verdict yields validated == false.
CommandRequest request_from(const ValidationVerdict& verdict,
                            std::int64_t timeout_ms = kDefaultExecTimeoutMs);

}  // namespace dockhand::core
