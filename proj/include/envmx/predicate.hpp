/*
 * Copyright 2026 The envmx Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file predicate.hpp
 * @brief Row filter expressions over result columns.
 *
 *   expr    := and ('||' and)*
 *   and     := unary ('&&' unary)*
 *   unary   := '!' unary | '(' expr ')' | compare
 *   compare := operand ('<' | '<=' | '>' | '>=' | '==' | '!=') operand
 *   operand := column | number [unit] | "string"
 *
 * A literal with a unit (mW, ns, pJ, MB, ...) is converted to the unit of the
 * column it is compared with; the dimensions must agree. Byte suffixes also
 * apply to byte-rate columns. Any comparison touching an absent value is false.
 */

#pragma once

#include <cctype>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "envmx/common.hpp"
#include "envmx/result_table.hpp"

namespace envmx {

enum class Dimension { None, Power, Time, Energy, Bytes, Area, Other };

struct UnitInfo {
  Dimension dimension = Dimension::None;
  double to_si = 1.0;
};

inline std::optional<UnitInfo> column_unit(std::string_view unit) {
  if (unit.empty()) return UnitInfo{};
  if (unit == "mW") return UnitInfo{Dimension::Power, 1e-3};
  if (unit == "ns") return UnitInfo{Dimension::Time, 1e-9};
  if (unit == "s") return UnitInfo{Dimension::Time, 1.0};
  if (unit == "pJ") return UnitInfo{Dimension::Energy, 1e-12};
  if (unit == "J") return UnitInfo{Dimension::Energy, 1.0};
  if (unit == "B" || unit == "B/s") return UnitInfo{Dimension::Bytes, 1.0};
  if (unit == "mm2") return UnitInfo{Dimension::Area, 1e-6};
  return UnitInfo{Dimension::Other, 1.0};
}

inline std::optional<UnitInfo> literal_unit(std::string_view suffix) {
  struct Entry {
    std::string_view name;
    UnitInfo info;
  };
  static const Entry kUnits[] = {
      {"W", {Dimension::Power, 1.0}},        {"mW", {Dimension::Power, 1e-3}},
      {"uW", {Dimension::Power, 1e-6}},      {"nW", {Dimension::Power, 1e-9}},
      {"s", {Dimension::Time, 1.0}},         {"ms", {Dimension::Time, 1e-3}},
      {"us", {Dimension::Time, 1e-6}},       {"ns", {Dimension::Time, 1e-9}},
      {"J", {Dimension::Energy, 1.0}},       {"mJ", {Dimension::Energy, 1e-3}},
      {"uJ", {Dimension::Energy, 1e-6}},     {"nJ", {Dimension::Energy, 1e-9}},
      {"pJ", {Dimension::Energy, 1e-12}},    {"B", {Dimension::Bytes, 1.0}},
      {"KB", {Dimension::Bytes, 1e3}},       {"MB", {Dimension::Bytes, 1e6}},
      {"GB", {Dimension::Bytes, 1e9}},       {"KiB", {Dimension::Bytes, 1024.0}},
      {"MiB", {Dimension::Bytes, 1048576.0}}, {"GiB", {Dimension::Bytes, 1073741824.0}},
      {"B/s", {Dimension::Bytes, 1.0}},      {"KB/s", {Dimension::Bytes, 1e3}},
      {"MB/s", {Dimension::Bytes, 1e6}},     {"GB/s", {Dimension::Bytes, 1e9}},
      {"mm2", {Dimension::Area, 1e-6}},      {"um2", {Dimension::Area, 1e-12}},
      {"yr", {Dimension::Time, 365.0 * 86400.0}},
  };
  for (const auto& e : kUnits) {
    if (e.name == suffix) return e.info;
  }
  return std::nullopt;
}

class Predicate {
 public:
  /// Compiles `expression` against `columns`. Throws ExpressionError.
  static Predicate compile(std::string_view expression, const std::vector<Column>& columns) {
    Parser p{expression, columns, 0};
    Predicate out;
    out.root_ = p.parse_or();
    p.skip_ws();
    if (p.pos != expression.size()) p.fail("unexpected '" + std::string(1, expression[p.pos]) + "'");
    return out;
  }

  bool operator()(const std::vector<Value>& row) const { return eval(*root_, row); }

 private:
  enum class Op { Lt, Le, Gt, Ge, Eq, Ne };

  struct Operand {
    enum class Kind { Column, Number, String } kind = Kind::Number;
    std::size_t column = 0;
    double number = 0;  // already in the unit of the opposing column
    std::string text;
    bool has_unit = false;
    UnitInfo unit;
    std::size_t pos = 0;
  };

  struct Node {
    enum class Kind { And, Or, Not, Compare } kind = Kind::Compare;
    std::unique_ptr<Node> lhs, rhs;
    Operand a, b;
    Op op = Op::Eq;
    bool string_compare = false;
    double a_scale = 1, b_scale = 1;  // column values to a common unit
  };

  struct Parser {
    std::string_view src;
    const std::vector<Column>& columns;
    std::size_t pos;

    [[noreturn]] void fail(const std::string& what) const { throw ExpressionError(pos, what); }
    [[noreturn]] void fail_at(std::size_t at, const std::string& what) const {
      throw ExpressionError(at, what);
    }

    void skip_ws() {
      while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }

    bool accept(std::string_view tok) {
      skip_ws();
      if (src.substr(pos, tok.size()) == tok) {
        pos += tok.size();
        return true;
      }
      return false;
    }

    std::unique_ptr<Node> parse_or() {
      auto lhs = parse_and();
      while (accept("||")) {
        auto n = std::make_unique<Node>();
        n->kind = Node::Kind::Or;
        n->lhs = std::move(lhs);
        n->rhs = parse_and();
        lhs = std::move(n);
      }
      return lhs;
    }

    std::unique_ptr<Node> parse_and() {
      auto lhs = parse_unary();
      while (accept("&&")) {
        auto n = std::make_unique<Node>();
        n->kind = Node::Kind::And;
        n->lhs = std::move(lhs);
        n->rhs = parse_unary();
        lhs = std::move(n);
      }
      return lhs;
    }

    std::unique_ptr<Node> parse_unary() {
      skip_ws();
      if (pos < src.size() && src[pos] == '!' && src.substr(pos, 2) != "!=") {
        ++pos;
        auto n = std::make_unique<Node>();
        n->kind = Node::Kind::Not;
        n->lhs = parse_unary();
        return n;
      }
      if (accept("(")) {
        auto inner = parse_or();
        if (!accept(")")) fail("expected ')'");
        return inner;
      }
      return parse_compare();
    }

    Operand parse_operand() {
      skip_ws();
      Operand o;
      o.pos = pos;
      if (pos >= src.size()) fail("expected a column name or a literal");
      const char c = src[pos];
      if (c == '"' || c == '\'') {
        const std::size_t end = src.find(c, pos + 1);
        if (end == std::string_view::npos) fail("unterminated string");
        o.kind = Operand::Kind::String;
        o.text = std::string(src.substr(pos + 1, end - pos - 1));
        pos = end + 1;
        return o;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+') {
        const std::string rest(src.substr(pos));
        char* end = nullptr;
        const double v = std::strtod(rest.c_str(), &end);
        if (end == rest.c_str()) fail("malformed number");
        pos += static_cast<std::size_t>(end - rest.c_str());
        o.kind = Operand::Kind::Number;
        o.number = v;
        const std::size_t unit_start = pos;
        if (pos < src.size() && std::isalpha(static_cast<unsigned char>(src[pos]))) {
          while (pos < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '/')) {
            ++pos;
          }
          const std::string_view suffix = src.substr(unit_start, pos - unit_start);
          auto unit = literal_unit(suffix);
          if (!unit) fail_at(unit_start, "unknown unit '" + std::string(suffix) + "'");
          o.has_unit = true;
          o.unit = *unit;
        }
        return o;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        const std::size_t start = pos;
        while (pos < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_')) {
          ++pos;
        }
        const std::string name(src.substr(start, pos - start));
        if (name == "true" || name == "false") {
          o.kind = Operand::Kind::Number;
          o.number = name == "true" ? 1.0 : 0.0;
          return o;
        }
        for (std::size_t i = 0; i < columns.size(); ++i) {
          if (columns[i].name == name) {
            o.kind = Operand::Kind::Column;
            o.column = i;
            return o;
          }
        }
        fail_at(start, "unknown column '" + name + "'");
      }
      fail(std::string("unexpected '") + c + "'");
    }

    Op parse_op() {
      skip_ws();
      static const std::pair<std::string_view, Op> kOps[] = {
          {"<=", Op::Le}, {">=", Op::Ge}, {"==", Op::Eq}, {"!=", Op::Ne}, {"<", Op::Lt}, {">", Op::Gt}};
      for (const auto& [tok, op] : kOps) {
        if (src.substr(pos, tok.size()) == tok) {
          pos += tok.size();
          return op;
        }
      }
      fail("expected a comparison operator");
    }

    std::unique_ptr<Node> parse_compare() {
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::Compare;
      n->a = parse_operand();
      n->op = parse_op();
      n->b = parse_operand();
      resolve(*n);
      return n;
    }

    bool is_string_column(const Operand& o) const {
      return o.kind == Operand::Kind::Column && columns[o.column].kind == ColumnKind::String;
    }

    void resolve(Node& n) const {
      Operand& a = n.a;
      Operand& b = n.b;
      const bool str_a = a.kind == Operand::Kind::String || is_string_column(a);
      const bool str_b = b.kind == Operand::Kind::String || is_string_column(b);
      if (str_a || str_b) {
        if (!(str_a && str_b)) fail_at(a.pos, "cannot compare text with a number");
        if (n.op != Op::Eq && n.op != Op::Ne) fail_at(a.pos, "text supports only == and !=");
        n.string_compare = true;
        return;
      }
      if (a.kind != Operand::Kind::Column && b.kind != Operand::Kind::Column) {
        fail_at(a.pos, "comparison needs at least one column");
      }
      auto unit_of = [&](const Operand& o) { return *column_unit(columns[o.column].unit); };
      if (a.kind == Operand::Kind::Column && b.kind == Operand::Kind::Column) {
        const UnitInfo ua = unit_of(a);
        const UnitInfo ub = unit_of(b);
        if (ua.dimension != ub.dimension) fail_at(a.pos, "columns have different dimensions");
        n.a_scale = ua.to_si;
        n.b_scale = ub.to_si;
        return;
      }
      Operand& col = a.kind == Operand::Kind::Column ? a : b;
      Operand& lit = a.kind == Operand::Kind::Column ? b : a;
      if (!lit.has_unit) return;
      const UnitInfo uc = unit_of(col);
      if (uc.dimension == Dimension::None || uc.dimension != lit.unit.dimension) {
        fail_at(lit.pos, "unit does not match column '" + columns[col.column].name + "'");
      }
      lit.number = lit.number * lit.unit.to_si / uc.to_si;
    }
  };

  static std::optional<double> numeric(const Value& v) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (const auto* b = std::get_if<bool>(&v)) return *b ? 1.0 : 0.0;
    return std::nullopt;
  }

  static bool compare(double x, Op op, double y) {
    switch (op) {
      case Op::Lt: return x < y;
      case Op::Le: return x <= y;
      case Op::Gt: return x > y;
      case Op::Ge: return x >= y;
      case Op::Eq: return x == y;
      case Op::Ne: return x != y;
    }
    return false;
  }

  static bool eval(const Node& n, const std::vector<Value>& row) {
    switch (n.kind) {
      case Node::Kind::And: return eval(*n.lhs, row) && eval(*n.rhs, row);
      case Node::Kind::Or: return eval(*n.lhs, row) || eval(*n.rhs, row);
      case Node::Kind::Not: return !eval(*n.lhs, row);
      case Node::Kind::Compare: break;
    }
    if (n.string_compare) {
      auto text = [&](const Operand& o) -> std::optional<std::string> {
        if (o.kind == Operand::Kind::String) return o.text;
        if (const auto* s = std::get_if<std::string>(&row[o.column])) return *s;
        return std::nullopt;
      };
      const auto x = text(n.a);
      const auto y = text(n.b);
      if (!x || !y) return false;
      return n.op == Op::Eq ? *x == *y : *x != *y;
    }
    auto value = [&](const Operand& o, double scale) -> std::optional<double> {
      if (o.kind == Operand::Kind::Number) return o.number;
      auto v = numeric(row[o.column]);
      if (!v) return std::nullopt;
      return *v * scale;
    };
    const auto x = value(n.a, n.a_scale);
    const auto y = value(n.b, n.b_scale);
    if (!x || !y) return false;
    return compare(*x, n.op, *y);
  }

  std::shared_ptr<const Node> root_;
};

/// Rows of `table` satisfying `expression`, in their original order.
inline ResultTable filter(const ResultTable& table, std::string_view expression) {
  const Predicate pred = Predicate::compile(expression, result_columns());
  ResultTable out;
  out.config_fingerprint = table.config_fingerprint;
  for (const auto& r : table.rows) {
    if (pred(to_values(r))) out.rows.push_back(r);
  }
  return out;
}

}  // namespace envmx
