#include "dockhand/core/validation.hpp"

#include <optional>

namespace dockhand::core {

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::not_docker: return "not_docker";
    case RejectReason::subcommand_denied: return "subcommand_denied";
    case RejectReason::forbidden_character: return "forbidden_character";
    case RejectReason::too_long: return "too_long";
    case RejectReason::empty: return "empty";
  }
  return "empty";
}

ValidationPolicy ValidationPolicy::defaults() {
  ValidationPolicy p;
  p.allowlisted_subcommands = {"ps",   "images",  "start",   "stop", "restart",
                               "rm",   "rmi",     "run",     "pull", "logs",
                               "inspect", "volume", "version", "info", "stats"};
  p.forbidden_characters = std::string{";|&`$<>\n\\"};
  p.max_length = 4096;
  return p;
}

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

struct Tokenized {
  std::string normalized;
  std::vector<std::string> words;
};

// Quote-aware split. Returns nullopt on an unterminated quote.
std::optional<Tokenized> tokenize(std::string_view text) {
  Tokenized t;
  std::string word;
  bool in_word = false;
  char quote = 0;
  bool pending_space = false;
  for (char c : text) {
    if (quote) {
      t.normalized.push_back(c);
      if (c == quote) quote = 0;
      else word.push_back(c);
      continue;
    }
    if (is_space(c)) {
      if (in_word) {
        t.words.push_back(std::move(word));
        word.clear();
        in_word = false;
        pending_space = true;
      }
      continue;
    }
    if (pending_space) {
      t.normalized.push_back(' ');
      pending_space = false;
    }
    t.normalized.push_back(c);
    in_word = true;
    if (c == '\'' || c == '"') quote = c;
    else word.push_back(c);
  }
  if (quote) return std::nullopt;
  if (in_word) t.words.push_back(std::move(word));
  return t;
}

}  // namespace

ValidationVerdict validate_command(std::string_view raw, const ValidationPolicy& policy) {
  auto first = raw.find_first_not_of(" \t\n\r\v\f");
  if (first == std::string_view::npos) return ValidationVerdict::reject(RejectReason::empty);
  if (raw.size() > policy.max_length) return ValidationVerdict::reject(RejectReason::too_long);
  if (raw.find_first_of(policy.forbidden_characters) != std::string_view::npos)
    return ValidationVerdict::reject(RejectReason::forbidden_character);

  auto tokens = tokenize(raw);
  if (!tokens) return ValidationVerdict::reject(RejectReason::forbidden_character);
  const auto& words = tokens->words;
  if (words.empty() || words[0] != "docker") return ValidationVerdict::reject(RejectReason::not_docker);
  if (words.size() < 2 || !policy.allowlisted_subcommands.contains(words[1]))
    return ValidationVerdict::reject(RejectReason::subcommand_denied);
  return ValidationVerdict::accept(std::move(tokens->normalized));
}

std::vector<std::string> split_command(std::string_view normalized) {
  auto tokens = tokenize(normalized);
  if (!tokens) return {};
  return std::move(tokens->words);
}

std::string shell_quote(std::string_view word) {
  std::string out = "'";
  for (char c : word) {
    if (c == '\'') out += "'\\''";
    else out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

CommandRequest request_from(const ValidationVerdict& verdict, std::int64_t timeout_ms) {
  CommandRequest req;
  req.timeout_ms = timeout_ms;
  if (verdict.accepted()) {
    req.raw = verdict.normalized();
    req.validated = true;
  }
  return req;
}

}  // namespace dockhand::core
