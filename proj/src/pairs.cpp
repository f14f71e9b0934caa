#include "srdf/pairs.hpp"

#include <charconv>

namespace srdf {

std::string_view decode_mode_name(DecodeMode m) {
  return m == DecodeMode::greedy ? "greedy" : "top_k";
}

DecodeMode parse_decode_mode(std::string_view name) {
  if (name == "greedy") return DecodeMode::greedy;
  if (name == "top_k") return DecodeMode::top_k;
  throw Error(ErrorCode::invalid_argument, "unknown decode mode '" + std::string(name) + "'");
}

std::string Provenance::to_string() const {
  if (kind == Kind::seed) return "seed";
  return "gen:" + std::to_string(round) + ":" + std::string(decode_mode_name(mode));
}

Provenance Provenance::parse(std::string_view text) {
  if (text == "seed") return seed();
  const auto bad = [&] {
    return Error(ErrorCode::schema_violation, "bad provenance '" + std::string(text) + "'");
  };
  if (text.substr(0, 4) != "gen:") throw bad();
  const auto rest = text.substr(4);
  const auto colon = rest.find(':');
  if (colon == std::string_view::npos) throw bad();
  int round = 0;
  const auto num = rest.substr(0, colon);
  auto res = std::from_chars(num.data(), num.data() + num.size(), round);
  if (res.ec != std::errc() || res.ptr != num.data() + num.size() || round < 1)
    throw bad();
  try {
    return generated(round, parse_decode_mode(rest.substr(colon + 1)));
  } catch (const Error&) {
    throw bad();
  }
}

}  // namespace srdf
