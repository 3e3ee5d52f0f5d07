#pragma once

// Point-set file formats.
//
// Text format:
//
//   # any line may carry a comment after '#'
//   n=7,d=1          <- grid header, first non-blank line (spaces allowed)
//   0
//   1
//   4,0              <- (for d=2) coordinates, comma separated, coordinate 0 first
//
// Rank-list JSON: {"n": 7, "d": 1, "ranks": [0, 1, 4, 6]}, or a bare array
// [0, 1, 4, 6] when the grid is supplied separately.

#include <charconv>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sidonlab/grid.hpp"

namespace sidon {

struct PointSetFile {
  GridParams grid{1, 1};
  RankSet ranks;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::uint64_t parse_u64(std::string_view s, std::size_t line) {
  s = trim(s);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(line, "expected a non-negative integer, got '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

// "n=7,d=1" (also "n=7 d=1").
inline std::optional<GridParams> parse_header(std::string_view s, std::size_t line) {
  if (s.empty() || s.front() != 'n') return std::nullopt;
  std::string normalized(s);
  for (auto& c : normalized)
    if (c == ' ' || c == '\t') c = ',';
  std::optional<std::uint64_t> n, d;
  for (auto field : split(normalized, ',')) {
    field = trim(field);
    if (field.empty()) continue;
    auto eq = field.find('=');
    if (eq == std::string_view::npos) throw ParseError(line, "malformed grid header field '" + std::string(field) + "'");
    auto key = trim(field.substr(0, eq));
    auto value = parse_u64(field.substr(eq + 1), line);
    if (key == "n") n = value;
    else if (key == "d") d = value;
    else throw ParseError(line, "unknown grid header key '" + std::string(key) + "'");
  }
  if (!n || !d) throw ParseError(line, "grid header needs both n and d");
  try {
    return GridParams(*n, static_cast<unsigned>(*d));
  } catch (const ValidationError& e) {
    throw ParseError(line, e.what());
  }
}

}  // namespace detail

// `fallback` supplies the grid when the text carries no header.
inline PointSetFile parse_point_text(std::string_view text, std::optional<GridParams> fallback = std::nullopt) {
  std::optional<GridParams> grid;
  std::vector<std::pair<std::size_t, std::vector<std::uint64_t>>> rows;
  std::size_t line_no = 0;
  for (auto raw : detail::split(text, '\n')) {
    ++line_no;
    auto hash = raw.find('#');
    auto line = detail::trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (!grid && rows.empty()) {
      if (auto header = detail::parse_header(line, line_no)) {
        grid = header;
        continue;
      }
    }
    std::vector<std::uint64_t> coords;
    for (auto field : detail::split(line, ',')) coords.push_back(detail::parse_u64(field, line_no));
    rows.emplace_back(line_no, std::move(coords));
  }
  if (!grid) grid = fallback;
  if (!grid) {
    if (!rows.empty()) throw ParseError(rows.front().first, "missing grid header 'n=<n>,d=<d>'");
    grid = GridParams(1, 1);
  }
  PointSetFile out{*grid, {}};
  out.ranks.reserve(rows.size());
  for (auto& [line, coords] : rows) {
    try {
      out.ranks.push_back(rank(make_point(std::move(coords), *grid), *grid));
    } catch (const ValidationError& e) {
      throw ParseError(line, e.what());
    }
  }
  out.ranks = normalize(out.ranks, *grid);
  return out;
}

inline std::string format_point_text(std::span<const Rank> ranks, const GridParams& g) {
  std::ostringstream os;
  os << "n=" << g.n() << ",d=" << g.d() << '\n';
  for (auto r : normalize(ranks, g)) {
    auto p = unrank(r, g);
    for (std::size_t i = 0; i < p.coords.size(); ++i) os << (i ? "," : "") << p.coords[i];
    os << '\n';
  }
  return os.str();
}

inline nlohmann::json rank_list_json(std::span<const Rank> ranks, const GridParams& g) {
  return nlohmann::json{{"n", g.n()}, {"d", g.d()}, {"ranks", normalize(ranks, g)}};
}

inline PointSetFile parse_rank_list_json(std::string_view text, std::optional<GridParams> fallback = std::nullopt) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("invalid JSON: ") + e.what());
  }
  try {
    std::optional<GridParams> grid = fallback;
    const nlohmann::json* list = &j;
    if (j.is_object()) {
      grid = GridParams(j.at("n").get<std::uint64_t>(), j.at("d").get<unsigned>());
      list = &j.at("ranks");
    }
    if (!list->is_array()) throw ParseError(0, "rank list must be a JSON array");
    if (!grid) {
      if (!list->empty()) throw ParseError(0, "bare rank array needs the grid from elsewhere");
      grid = GridParams(1, 1);
    }
    return PointSetFile{*grid, normalize(list->get<RankSet>(), *grid)};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("malformed rank list: ") + e.what());
  } catch (const ValidationError& e) {
    throw ParseError(0, e.what());
  }
}

}  // namespace sidon
