#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "refine/ast.hpp"
#include "refine/diag.hpp"

namespace refine {

using StateSet = boost::dynamic_bitset<>;

// A state binds every declared variable, in declaration order.
using State = std::vector<Value>;

// Enumerated product of the declared variable sorts. Constants are not part
// of the state; they are fixed values shared by evaluation.
class StateSpace {
public:
  explicit StateSpace(ProgramDecl decl) : decl_(std::move(decl)) {
    std::uint64_t total = 1;
    for (auto& [name, sort] : decl_.vars) {
      varIndex_[name] = static_cast<int>(weights_.size());
      std::uint64_t card = sort.cardinality();
      if (total > (std::uint64_t{1} << 31) / std::max<std::uint64_t>(card, 1))
        throw CapExceeded("state space too large to enumerate");
      weights_.push_back(total);
      cards_.push_back(card);
      total *= card;
    }
    size_ = total;
  }

  const ProgramDecl& decl() const { return decl_; }
  std::size_t size() const { return static_cast<std::size_t>(size_); }
  std::size_t varCount() const { return decl_.vars.size(); }

  int indexOfVar(const std::string& name) const {
    auto it = varIndex_.find(name);
    return it == varIndex_.end() ? -1 : it->second;
  }

  State decode(std::uint64_t idx) const {
    State st(varCount());
    for (std::size_t i = 0; i < varCount(); ++i) {
      std::uint64_t digit = (idx / weights_[i]) % cards_[i];
      st[i] = decl_.vars[i].second.valueAt(digit);
    }
    return st;
  }

  std::optional<std::uint64_t> encode(const State& st) const {
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < varCount(); ++i) {
      auto digit = decl_.vars[i].second.indexOf(st[i]);
      if (!digit) return std::nullopt;
      idx += *digit * weights_[i];
    }
    return idx;
  }

  // Index update for a single-variable change; nullopt if out of sort.
  std::optional<std::uint64_t> withVar(std::uint64_t idx, int var,
                                       const Value& v) const {
    auto digit = decl_.vars[var].second.indexOf(v);
    if (!digit) return std::nullopt;
    std::uint64_t old = (idx / weights_[var]) % cards_[var];
    return idx - old * weights_[var] + *digit * weights_[var];
  }

  Value varValue(std::uint64_t idx, int var) const {
    std::uint64_t digit = (idx / weights_[var]) % cards_[var];
    return decl_.vars[var].second.valueAt(digit);
  }

  StateSet emptySet() const { return StateSet(size()); }
  StateSet fullSet() const { StateSet s(size()); s.set(); return s; }

  bool operator==(const StateSpace& other) const { return this == &other; }

private:
  ProgramDecl decl_;
  std::vector<std::uint64_t> weights_;
  std::vector<std::uint64_t> cards_;
  std::unordered_map<std::string, int> varIndex_;
  std::uint64_t size_ = 1;
};

// ---------------------------------------------------------------------------
// Canonical printing: {x=0, s={1,2}, A=[0,1]}
// ---------------------------------------------------------------------------

inline std::string toString(const Value& v) {
  std::ostringstream os;
  if (v.isInt()) {
    os << v.asInt();
  } else if (v.isSet()) {
    os << '{';
    bool first = true;
    for (long long e : v.asSet().elems) {
      if (!first) os << ',';
      os << e;
      first = false;
    }
    os << '}';
  } else {
    os << '[';
    bool first = true;
    for (long long e : v.asArray().elems) {
      if (!first) os << ',';
      os << e;
      first = false;
    }
    os << ']';
  }
  return os.str();
}

inline std::string stateToString(const StateSpace& space, std::uint64_t idx) {
  std::ostringstream os;
  os << '{';
  State st = space.decode(idx);
  for (std::size_t i = 0; i < space.varCount(); ++i) {
    if (i) os << ", ";
    os << space.decl().vars[i].first << '=' << toString(st[i]);
  }
  os << '}';
  return os.str();
}

// ---------------------------------------------------------------------------
// Evaluation. Faults (out-of-bounds index, negative shift, oversized
// arithmetic) surface as nullopt and are consumed by the semantics as error
// transitions.
// ---------------------------------------------------------------------------

struct EvalEnv {
  const StateSpace* space = nullptr;
  std::uint64_t state = 0;
  // Innermost binders last; searched before program variables.
  const std::vector<std::pair<std::string, Value>>* logicals = nullptr;

  std::optional<Value> lookup(const std::string& name) const {
    if (logicals) {
      for (auto it = logicals->rbegin(); it != logicals->rend(); ++it)
        if (it->first == name) return it->second;
    }
    if (space) {
      int vi = space->indexOfVar(name);
      if (vi >= 0) return space->varValue(state, vi);
      auto it = space->decl().constants.find(name);
      if (it != space->decl().constants.end()) return it->second;
    }
    return std::nullopt;
  }
};

namespace detail {
// Arithmetic beyond +/-2^62 faults; every declarable sort lies far below
// this bound, so the cap only cuts off runaway intermediates.
inline std::optional<long long> checkedNarrow(__int128 r) {
  const long long cap = (1LL << 62);
  if (r > cap || r < -cap) return std::nullopt;
  return static_cast<long long>(r);
}
}  // namespace detail

inline std::optional<Value> evalExpr(const ExprRef& e, const EvalEnv& env) {
  using detail::checkedNarrow;
  switch (e->kind) {
    case ExprKind::IntLit:
      return Value(e->intVal);
    case ExprKind::SetLit:
      return Value(e->setVal);
    case ExprKind::Var: {
      auto v = env.lookup(e->name);
      if (!v) return std::nullopt;
      return v;
    }
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::BitOr:
    case ExprKind::Shl: {
      auto a = evalExpr(e->a, env), b = evalExpr(e->b, env);
      if (!a || !b || !a->isInt() || !b->isInt()) return std::nullopt;
      long long x = a->asInt(), y = b->asInt();
      std::optional<long long> r;
      switch (e->kind) {
        case ExprKind::Add: r = checkedNarrow(static_cast<__int128>(x) + y); break;
        case ExprKind::Sub: r = checkedNarrow(static_cast<__int128>(x) - y); break;
        case ExprKind::Mul: r = checkedNarrow(static_cast<__int128>(x) * y); break;
        case ExprKind::BitOr:
          if (x < 0 || y < 0) return std::nullopt;
          r = x | y;
          break;
        case ExprKind::Shl:
          if (y < 0 || y > 62 || x < 0) return std::nullopt;
          r = checkedNarrow(static_cast<__int128>(x) << y);
          break;
        default: break;
      }
      if (!r) return std::nullopt;
      return Value(*r);
    }
    case ExprKind::SetUnion: {
      auto a = evalExpr(e->a, env), b = evalExpr(e->b, env);
      if (!a || !b || !a->isSet() || !b->isSet()) return std::nullopt;
      std::vector<long long> elems = a->asSet().elems;
      for (long long x : b->asSet().elems) elems.push_back(x);
      return Value(makeSet(std::move(elems)));
    }
    case ExprKind::SetSingleton: {
      auto a = evalExpr(e->a, env);
      if (!a || !a->isInt()) return std::nullopt;
      return Value(SetVal{{a->asInt()}});
    }
    case ExprKind::ArrayIndex: {
      auto a = evalExpr(e->a, env), i = evalExpr(e->b, env);
      if (!a || !i || !a->isArray() || !i->isInt()) return std::nullopt;
      long long idx = i->asInt();
      const auto& elems = a->asArray().elems;
      if (idx < 0 || idx >= static_cast<long long>(elems.size()))
        return std::nullopt;
      return Value(elems[static_cast<std::size_t>(idx)]);
    }
    case ExprKind::Length: {
      auto a = evalExpr(e->a, env);
      if (!a || !a->isArray()) return std::nullopt;
      return Value(static_cast<long long>(a->asArray().elems.size()));
    }
    case ExprKind::Sum2: {
      auto a = evalExpr(e->a, env);
      if (!a || !a->isSet()) return std::nullopt;
      long long acc = 0;
      for (long long u : a->asSet().elems) {
        if (u < 0 || u > 62) return std::nullopt;
        auto r = checkedNarrow(static_cast<__int128>(acc) + (1LL << u));
        if (!r) return std::nullopt;
        acc = *r;
      }
      return Value(acc);
    }
  }
  return std::nullopt;
}

// Strict evaluation: a fault in any operand faults the whole formula.
inline std::optional<bool> evalBool(const BoolRef& b, const EvalEnv& env) {
  switch (b->kind) {
    case BoolKind::Lit:
      return b->lit;
    case BoolKind::Eq: {
      auto x = evalExpr(b->e1, env), y = evalExpr(b->e2, env);
      if (!x || !y) return std::nullopt;
      return *x == *y;
    }
    case BoolKind::Lt:
    case BoolKind::Le: {
      auto x = evalExpr(b->e1, env), y = evalExpr(b->e2, env);
      if (!x || !y || !x->isInt() || !y->isInt()) return std::nullopt;
      return b->kind == BoolKind::Lt ? x->asInt() < y->asInt()
                                     : x->asInt() <= y->asInt();
    }
    case BoolKind::Member: {
      auto x = evalExpr(b->e1, env), y = evalExpr(b->e2, env);
      if (!x || !y || !x->isInt() || !y->isSet()) return std::nullopt;
      const auto& elems = y->asSet().elems;
      return std::binary_search(elems.begin(), elems.end(), x->asInt());
    }
    case BoolKind::And: {
      auto x = evalBool(b->b1, env), y = evalBool(b->b2, env);
      if (!x || !y) return std::nullopt;
      return *x && *y;
    }
    case BoolKind::Or: {
      auto x = evalBool(b->b1, env), y = evalBool(b->b2, env);
      if (!x || !y) return std::nullopt;
      return *x || *y;
    }
    case BoolKind::Not: {
      auto x = evalBool(b->b1, env);
      if (!x) return std::nullopt;
      return !*x;
    }
  }
  return std::nullopt;
}

}  // namespace refine
