#pragma once

#include <cctype>
#include <cmath>
#include <string>
#include <vector>

#include "guarctl/common.hpp"

namespace guarctl {

/// Tiny arithmetic expression over the variables t, x<i>, u<i>, v<i>
/// (1-based indices), literals, + - * /, unary minus, parentheses and the
/// functions abs, sin, cos, exp, sqrt, max, min, pow.  Used to define
/// right-hand sides and terminal costs in configuration files.  Parsing
/// validates variable indices against the declared dimensions; evaluation is
/// allocation-free.
class Expression {
 public:
  static Expression parse(const std::string& text, int nx, int nu, int nv) {
    Parser p{text, 0, nx, nu, nv};
    Expression e;
    e.root_ = p.expr(e.pool_);
    p.skip_ws();
    if (p.pos != text.size())
      throw ConfigError("expression: unexpected trailing input at position " +
                        std::to_string(p.pos) + " in '" + text + "'");
    return e;
  }

  double eval(double t, std::span<const double> x, std::span<const double> u,
              std::span<const double> v) const {
    return eval_node(root_, t, x, u, v);
  }

 private:
  enum class Kind : unsigned char {
    Const, Time, StateVar, ControlVar, DisturbVar,
    Add, Sub, Mul, Div, Neg,
    Abs, Sin, Cos, Exp, Sqrt, Max, Min, Pow
  };

  struct Node {
    Kind kind;
    double value = 0.0;  // Const
    int index = 0;       // variable slot
    int a = -1, b = -1;  // children
  };

  double eval_node(int id, double t, std::span<const double> x,
                   std::span<const double> u, std::span<const double> v) const {
    const Node& n = pool_[static_cast<std::size_t>(id)];
    switch (n.kind) {
      case Kind::Const: return n.value;
      case Kind::Time: return t;
      case Kind::StateVar: return x[static_cast<std::size_t>(n.index)];
      case Kind::ControlVar: return u[static_cast<std::size_t>(n.index)];
      case Kind::DisturbVar: return v[static_cast<std::size_t>(n.index)];
      case Kind::Add: return eval_node(n.a, t, x, u, v) + eval_node(n.b, t, x, u, v);
      case Kind::Sub: return eval_node(n.a, t, x, u, v) - eval_node(n.b, t, x, u, v);
      case Kind::Mul: return eval_node(n.a, t, x, u, v) * eval_node(n.b, t, x, u, v);
      case Kind::Div: return eval_node(n.a, t, x, u, v) / eval_node(n.b, t, x, u, v);
      case Kind::Neg: return -eval_node(n.a, t, x, u, v);
      case Kind::Abs: return std::abs(eval_node(n.a, t, x, u, v));
      case Kind::Sin: return std::sin(eval_node(n.a, t, x, u, v));
      case Kind::Cos: return std::cos(eval_node(n.a, t, x, u, v));
      case Kind::Exp: return std::exp(eval_node(n.a, t, x, u, v));
      case Kind::Sqrt: return std::sqrt(eval_node(n.a, t, x, u, v));
      case Kind::Max: return std::max(eval_node(n.a, t, x, u, v), eval_node(n.b, t, x, u, v));
      case Kind::Min: return std::min(eval_node(n.a, t, x, u, v), eval_node(n.b, t, x, u, v));
      case Kind::Pow: return std::pow(eval_node(n.a, t, x, u, v), eval_node(n.b, t, x, u, v));
    }
    return 0.0;  // unreachable
  }

  struct Parser {
    const std::string& s;
    std::size_t pos;
    int nx, nu, nv;

    void skip_ws() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool eat(char c) {
      skip_ws();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    [[noreturn]] void fail(const std::string& what) const {
      throw ConfigError("expression: " + what + " at position " +
                        std::to_string(pos) + " in '" + s + "'");
    }

    int expr(std::vector<Node>& pool) {
      int lhs = term(pool);
      for (;;) {
        if (eat('+')) lhs = binary(pool, Kind::Add, lhs, term(pool));
        else if (eat('-')) lhs = binary(pool, Kind::Sub, lhs, term(pool));
        else return lhs;
      }
    }

    int term(std::vector<Node>& pool) {
      int lhs = factor(pool);
      for (;;) {
        if (eat('*')) lhs = binary(pool, Kind::Mul, lhs, factor(pool));
        else if (eat('/')) lhs = binary(pool, Kind::Div, lhs, factor(pool));
        else return lhs;
      }
    }

    int factor(std::vector<Node>& pool) {
      if (eat('-')) return unary(pool, Kind::Neg, factor(pool));
      if (eat('+')) return factor(pool);
      return primary(pool);
    }

    int primary(std::vector<Node>& pool) {
      skip_ws();
      if (pos >= s.size()) fail("unexpected end of input");
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t used = 0;
        double val = 0.0;
        try {
          val = std::stod(s.substr(pos), &used);
        } catch (const std::exception&) {
          fail("malformed number");
        }
        pos += used;
        Node n;
        n.kind = Kind::Const;
        n.value = val;
        pool.push_back(n);
        return static_cast<int>(pool.size()) - 1;
      }
      if (c == '(') {
        ++pos;
        const int inner = expr(pool);
        if (!eat(')')) fail("missing ')'");
        return inner;
      }
      if (std::isalpha(static_cast<unsigned char>(c))) return ident(pool);
      fail(std::string("unexpected character '") + c + "'");
    }

    int ident(std::vector<Node>& pool) {
      const std::size_t start = pos;
      while (pos < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
        ++pos;
      const std::string name = s.substr(start, pos - start);
      if (name == "t") return leaf(pool, Kind::Time, 0);
      if (name.size() >= 2 && (name[0] == 'x' || name[0] == 'u' || name[0] == 'v')) {
        bool digits = true;
        for (std::size_t k = 1; k < name.size(); ++k)
          if (!std::isdigit(static_cast<unsigned char>(name[k]))) digits = false;
        if (digits) {
          const int idx = std::stoi(name.substr(1));
          const int limit = name[0] == 'x' ? nx : name[0] == 'u' ? nu : nv;
          if (idx < 1 || idx > limit)
            fail("variable '" + name + "' out of range (dimension " +
                 std::to_string(limit) + ")");
          const Kind kind = name[0] == 'x'   ? Kind::StateVar
                            : name[0] == 'u' ? Kind::ControlVar
                                             : Kind::DisturbVar;
          return leaf(pool, kind, idx - 1);
        }
      }
      static const struct { const char* name; Kind kind; int arity; } kFns[] = {
          {"abs", Kind::Abs, 1},  {"sin", Kind::Sin, 1}, {"cos", Kind::Cos, 1},
          {"exp", Kind::Exp, 1},  {"sqrt", Kind::Sqrt, 1},
          {"max", Kind::Max, 2},  {"min", Kind::Min, 2}, {"pow", Kind::Pow, 2}};
      for (const auto& fn : kFns) {
        if (name != fn.name) continue;
        if (!eat('(')) fail("expected '(' after '" + name + "'");
        const int a = expr(pool);
        int b = -1;
        if (fn.arity == 2) {
          if (!eat(',')) fail("expected ',' in '" + name + "(...)'");
          b = expr(pool);
        }
        if (!eat(')')) fail("missing ')' after '" + name + "(...)'");
        Node n;
        n.kind = fn.kind;
        n.a = a;
        n.b = b;
        pool.push_back(n);
        return static_cast<int>(pool.size()) - 1;
      }
      fail("unknown identifier '" + name + "'");
    }

    int leaf(std::vector<Node>& pool, Kind kind, int index) {
      Node n;
      n.kind = kind;
      n.index = index;
      pool.push_back(n);
      return static_cast<int>(pool.size()) - 1;
    }

    int unary(std::vector<Node>& pool, Kind kind, int a) {
      Node n;
      n.kind = kind;
      n.a = a;
      pool.push_back(n);
      return static_cast<int>(pool.size()) - 1;
    }

    int binary(std::vector<Node>& pool, Kind kind, int a, int b) {
      Node n;
      n.kind = kind;
      n.a = a;
      n.b = b;
      pool.push_back(n);
      return static_cast<int>(pool.size()) - 1;
    }
  };

  std::vector<Node> pool_;
  int root_ = -1;
};

}  // namespace guarctl
