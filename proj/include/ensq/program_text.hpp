// Copyright 2026 The ensq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Text form of pulse programs, one step per line.
//
//   program   = { line } ;
//   line      = [ step ] [ "#" { any } ] newline ;
//   step      = pulse | gap | "MEASURE" ;
//   pulse     = ( "R0" | "R1" ) { ws option } ;
//   option    = "site=" site | "area=" angle | "duration=" time
//             | "phase=" angle | "detuning=" freq ;
//   site      = "s" | "single" | "c" | "control" | "t" | "target" ;
//   gap       = "GAP" ws time [ ws "offset=" freq ] ;
//   angle     = number [ "pi" ] ;            (bare numbers are radians)
//   time      = number [ ws ] ( "s" | "ms" | "us" | "ns" ) ;
//   freq      = number [ ws ] ( "Hz" | "kHz" | "MHz" | "rad/s" ) ;
//
// Keywords are case-sensitive. format_program prints the canonical form:
// angles as multiples of pi, numbers in shortest round-trip notation, and
// options equal to their defaults omitted (site=single, phase=0,
// detuning=0, offset=0). format_program(parse_program(x)) is a fixed point
// of parse-then-format.

#include <charconv>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ensq/program.hpp"

namespace ensq {

namespace detail {

struct Token {
  std::string_view text;
  int column;  // 1-based
};

inline std::vector<Token> split_tokens(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

inline double parse_number(std::string_view s, int line, int column, std::size_t& used) {
  double v = 0.0;
  const char* begin = s.data();
  if (!s.empty() && s.front() == '+') ++begin;
  const auto r = std::from_chars(begin, s.data() + s.size(), v);
  if (r.ec != std::errc{}) throw ParseError("expected a number", line, column);
  used = static_cast<std::size_t>(r.ptr - s.data());
  return v;
}

struct Cursor {
  const std::vector<Token>& tokens;
  std::size_t pos;
  int line;
};

// Number with a unit either attached or in the following token.
inline std::pair<double, std::pair<std::string_view, int>> number_and_unit(std::string_view text, int column,
                                                                            Cursor& cur) {
  std::size_t used = 0;
  const double v = parse_number(text, cur.line, column, used);
  std::string_view unit = text.substr(used);
  int unit_col = column + static_cast<int>(used);
  if (unit.empty()) {
    if (cur.pos >= cur.tokens.size() || cur.tokens[cur.pos].text.find('=') != std::string_view::npos) {
      throw ParseError("missing unit", cur.line, column + static_cast<int>(used));
    }
    unit = cur.tokens[cur.pos].text;
    unit_col = cur.tokens[cur.pos].column;
    ++cur.pos;
  }
  return {v, {unit, unit_col}};
}

inline Duration parse_duration(std::string_view text, int column, Cursor& cur) {
  const auto [v, u] = number_and_unit(text, column, cur);
  const auto& [unit, col] = u;
  TimeUnit tu;
  if (unit == "s") tu = TimeUnit::s;
  else if (unit == "ms") tu = TimeUnit::ms;
  else if (unit == "us") tu = TimeUnit::us;
  else if (unit == "ns") tu = TimeUnit::ns;
  else throw ParseError("unknown time unit '" + std::string(unit) + "'", cur.line, col);
  if (v < 0) throw ParseError("negative duration", cur.line, column);
  return {v, tu};
}

inline Frequency parse_frequency(std::string_view text, int column, Cursor& cur) {
  const auto [v, u] = number_and_unit(text, column, cur);
  const auto& [unit, col] = u;
  FrequencyUnit fu;
  if (unit == "Hz") fu = FrequencyUnit::Hz;
  else if (unit == "kHz") fu = FrequencyUnit::kHz;
  else if (unit == "MHz") fu = FrequencyUnit::MHz;
  else if (unit == "rad/s") fu = FrequencyUnit::rad_per_s;
  else throw ParseError("unknown frequency unit '" + std::string(unit) + "'", cur.line, col);
  return {v, fu};
}

inline Angle parse_angle(std::string_view text, int line, int column) {
  std::size_t used = 0;
  const double v = parse_number(text, line, column, used);
  const auto rest = text.substr(used);
  if (rest.empty()) return Angle::rad(v);
  if (rest == "pi") return Angle::pi(v);
  throw ParseError("unknown angle unit '" + std::string(rest) + "'", line, column + static_cast<int>(used));
}

inline Site parse_site(std::string_view v, int line, int column) {
  if (v == "s" || v == "single") return Site::single;
  if (v == "c" || v == "control") return Site::control;
  if (v == "t" || v == "target") return Site::target;
  throw ParseError("unknown site '" + std::string(v) + "'", line, column);
}

inline std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline const char* unit_name(TimeUnit u) {
  switch (u) {
    case TimeUnit::s: return "s";
    case TimeUnit::ms: return "ms";
    case TimeUnit::us: return "us";
    case TimeUnit::ns: return "ns";
  }
  return "s";
}

inline const char* unit_name(FrequencyUnit u) {
  switch (u) {
    case FrequencyUnit::rad_per_s: return "rad/s";
    case FrequencyUnit::Hz: return "Hz";
    case FrequencyUnit::kHz: return "kHz";
    case FrequencyUnit::MHz: return "MHz";
  }
  return "rad/s";
}

}  // namespace detail

inline PulseProgram parse_program(std::string_view text) {
  PulseProgram program;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = detail::split_tokens(line);
    if (tokens.empty()) {
      if (end == text.size()) break;
      continue;
    }
    detail::Cursor cur{tokens, 1, line_no};
    const auto head = tokens[0];
    if (head.text == "MEASURE") {
      if (tokens.size() > 1) throw ParseError("MEASURE takes no arguments", line_no, tokens[1].column);
      program.steps.emplace_back(Measure{});
    } else if (head.text == "GAP") {
      if (tokens.size() < 2) throw ParseError("GAP needs a duration", line_no, head.column + 3);
      Gap gap;
      const auto t = tokens[cur.pos++];
      gap.duration = detail::parse_duration(t.text, t.column, cur);
      while (cur.pos < tokens.size()) {
        const auto tok = tokens[cur.pos++];
        if (!tok.text.starts_with("offset=")) {
          throw ParseError("unexpected '" + std::string(tok.text) + "'", line_no, tok.column);
        }
        gap.offset = detail::parse_frequency(tok.text.substr(7), tok.column + 7, cur);
      }
      program.steps.emplace_back(gap);
    } else if (head.text == "R0" || head.text == "R1") {
      Pulse p;
      p.transition = head.text == "R0" ? Transition::zero_ryd : Transition::one_ryd;
      while (cur.pos < tokens.size()) {
        const auto tok = tokens[cur.pos++];
        const auto eq = tok.text.find('=');
        if (eq == std::string_view::npos || eq + 1 == tok.text.size()) {
          throw ParseError("expected key=value, got '" + std::string(tok.text) + "'", line_no, tok.column);
        }
        const auto key = tok.text.substr(0, eq);
        const auto value = tok.text.substr(eq + 1);
        const int vcol = tok.column + static_cast<int>(eq) + 1;
        if (key == "site") p.site = detail::parse_site(value, line_no, vcol);
        else if (key == "area") p.area = detail::parse_angle(value, line_no, vcol);
        else if (key == "phase") p.phase = detail::parse_angle(value, line_no, vcol);
        else if (key == "duration") p.duration = detail::parse_duration(value, vcol, cur);
        else if (key == "detuning") p.detuning = detail::parse_frequency(value, vcol, cur);
        else throw ParseError("unknown option '" + std::string(key) + "'", line_no, tok.column);
      }
      if (p.area.has_value() == p.duration.has_value()) {
        throw ParseError("pulse needs exactly one of area= and duration=", line_no, head.column);
      }
      program.steps.emplace_back(p);
    } else {
      throw ParseError("unknown step '" + std::string(head.text) + "'", line_no, head.column);
    }
    if (end == text.size()) break;
  }
  return program;
}

inline std::string format_program(const PulseProgram& program) {
  std::ostringstream os;
  for (const auto& step : program.steps) {
    if (const auto* p = std::get_if<Pulse>(&step)) {
      os << (p->transition == Transition::zero_ryd ? "R0" : "R1");
      if (p->site == Site::control) os << " site=c";
      if (p->site == Site::target) os << " site=t";
      if (p->area) os << " area=" << detail::shortest(p->area->pi_units) << "pi";
      if (p->duration) os << " duration=" << detail::shortest(p->duration->value) << detail::unit_name(p->duration->unit);
      if (p->phase.pi_units != 0.0) os << " phase=" << detail::shortest(p->phase.pi_units) << "pi";
      if (p->detuning.value != 0.0) {
        os << " detuning=" << detail::shortest(p->detuning.value) << detail::unit_name(p->detuning.unit);
      }
    } else if (const auto* g = std::get_if<Gap>(&step)) {
      os << "GAP " << detail::shortest(g->duration.value) << detail::unit_name(g->duration.unit);
      if (g->offset.value != 0.0) {
        os << " offset=" << detail::shortest(g->offset.value) << detail::unit_name(g->offset.unit);
      }
    } else {
      os << "MEASURE";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace ensq
