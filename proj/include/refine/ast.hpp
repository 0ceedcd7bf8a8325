#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "refine/diag.hpp"

namespace refine {

// ---------------------------------------------------------------------------
// Sorts: every sort denotes a finite, enumerable value set.
// ---------------------------------------------------------------------------

struct IntRange {
  long long lo = 0;
  long long hi = 0;
  bool operator==(const IntRange&) const = default;
};

struct SetOver {
  std::vector<long long> universe;  // sorted, duplicate-free
  bool operator==(const SetOver&) const = default;
};

struct ArrayOf {
  std::size_t length = 1;
  IntRange elem;
  bool operator==(const ArrayOf&) const = default;
};

struct SetVal {
  std::vector<long long> elems;  // sorted, duplicate-free
  bool operator==(const SetVal&) const = default;
};

struct ArrayVal {
  std::vector<long long> elems;  // fixed length
  bool operator==(const ArrayVal&) const = default;
};

class Value {
public:
  Value() : v_(0LL) {}
  explicit Value(long long i) : v_(i) {}
  explicit Value(SetVal s) : v_(std::move(s)) {}
  explicit Value(ArrayVal a) : v_(std::move(a)) {}

  bool isInt() const { return std::holds_alternative<long long>(v_); }
  bool isSet() const { return std::holds_alternative<SetVal>(v_); }
  bool isArray() const { return std::holds_alternative<ArrayVal>(v_); }

  long long asInt() const { return std::get<long long>(v_); }
  const SetVal& asSet() const { return std::get<SetVal>(v_); }
  const ArrayVal& asArray() const { return std::get<ArrayVal>(v_); }

  bool operator==(const Value&) const = default;

private:
  std::variant<long long, SetVal, ArrayVal> v_;
};

inline SetVal makeSet(std::vector<long long> elems) {
  std::sort(elems.begin(), elems.end());
  elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  return SetVal{std::move(elems)};
}

class Sort {
public:
  enum class Kind { Int, Set, Array };

  Sort() : v_(IntRange{0, 0}) {}
  explicit Sort(IntRange r) : v_(r) {
    if (r.lo > r.hi) throw LoadError("empty integer range sort");
  }
  explicit Sort(SetOver s) : v_(std::move(s)) {
    auto& u = std::get<SetOver>(v_).universe;
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    if (u.size() > 24) throw LoadError("set universe too large to enumerate");
  }
  explicit Sort(ArrayOf a) : v_(a) {
    if (a.length < 1) throw LoadError("array sort needs length >= 1");
    if (a.elem.lo > a.elem.hi) throw LoadError("empty array element range");
  }

  Kind kind() const {
    if (std::holds_alternative<IntRange>(v_)) return Kind::Int;
    if (std::holds_alternative<SetOver>(v_)) return Kind::Set;
    return Kind::Array;
  }
  const IntRange& intRange() const { return std::get<IntRange>(v_); }
  const SetOver& setOver() const { return std::get<SetOver>(v_); }
  const ArrayOf& arrayOf() const { return std::get<ArrayOf>(v_); }

  std::uint64_t cardinality() const {
    switch (kind()) {
      case Kind::Int: {
        const auto& r = intRange();
        return static_cast<std::uint64_t>(r.hi - r.lo) + 1;
      }
      case Kind::Set:
        return std::uint64_t{1} << setOver().universe.size();
      case Kind::Array: {
        const auto& a = arrayOf();
        std::uint64_t per =
            static_cast<std::uint64_t>(a.elem.hi - a.elem.lo) + 1;
        std::uint64_t total = 1;
        for (std::size_t i = 0; i < a.length; ++i) {
          if (total > (std::uint64_t{1} << 40) / per)
            throw CapExceeded("array sort cardinality too large");
          total *= per;
        }
        return total;
      }
    }
    return 0;
  }

  // Deterministic enumeration: index -> value.
  Value valueAt(std::uint64_t idx) const {
    switch (kind()) {
      case Kind::Int:
        return Value(intRange().lo + static_cast<long long>(idx));
      case Kind::Set: {
        const auto& u = setOver().universe;
        std::vector<long long> elems;
        for (std::size_t b = 0; b < u.size(); ++b)
          if (idx & (std::uint64_t{1} << b)) elems.push_back(u[b]);
        return Value(SetVal{std::move(elems)});
      }
      case Kind::Array: {
        const auto& a = arrayOf();
        std::uint64_t per =
            static_cast<std::uint64_t>(a.elem.hi - a.elem.lo) + 1;
        std::vector<long long> elems(a.length);
        for (std::size_t i = 0; i < a.length; ++i) {
          elems[i] = a.elem.lo + static_cast<long long>(idx % per);
          idx /= per;
        }
        return Value(ArrayVal{std::move(elems)});
      }
    }
    return Value();
  }

  std::optional<std::uint64_t> indexOf(const Value& v) const {
    switch (kind()) {
      case Kind::Int: {
        if (!v.isInt()) return std::nullopt;
        const auto& r = intRange();
        if (v.asInt() < r.lo || v.asInt() > r.hi) return std::nullopt;
        return static_cast<std::uint64_t>(v.asInt() - r.lo);
      }
      case Kind::Set: {
        if (!v.isSet()) return std::nullopt;
        const auto& u = setOver().universe;
        std::uint64_t idx = 0;
        for (long long e : v.asSet().elems) {
          auto it = std::lower_bound(u.begin(), u.end(), e);
          if (it == u.end() || *it != e) return std::nullopt;
          idx |= std::uint64_t{1} << (it - u.begin());
        }
        return idx;
      }
      case Kind::Array: {
        if (!v.isArray()) return std::nullopt;
        const auto& a = arrayOf();
        const auto& elems = v.asArray().elems;
        if (elems.size() != a.length) return std::nullopt;
        std::uint64_t per =
            static_cast<std::uint64_t>(a.elem.hi - a.elem.lo) + 1;
        std::uint64_t idx = 0, weight = 1;
        for (std::size_t i = 0; i < a.length; ++i) {
          if (elems[i] < a.elem.lo || elems[i] > a.elem.hi)
            return std::nullopt;
          idx += static_cast<std::uint64_t>(elems[i] - a.elem.lo) * weight;
          weight *= per;
        }
        return idx;
      }
    }
    return std::nullopt;
  }

  bool contains(const Value& v) const { return indexOf(v).has_value(); }

  bool operator==(const Sort&) const = default;

private:
  std::variant<IntRange, SetOver, ArrayOf> v_;
};

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

struct Expr;
using ExprRef = std::shared_ptr<const Expr>;

enum class ExprKind {
  IntLit,
  SetLit,
  Var,
  Add,
  Sub,
  Mul,
  BitOr,
  Shl,
  SetUnion,
  SetSingleton,
  ArrayIndex,
  Length,
  Sum2,  // sum of 2^a over the elements of a set expression
};

struct Expr {
  ExprKind kind;
  long long intVal = 0;        // IntLit
  SetVal setVal;               // SetLit
  std::string name;            // Var
  ExprRef a, b;                // children
  std::size_t hash = 0;

  Expr(ExprKind k, long long i, SetVal s, std::string n, ExprRef x, ExprRef y)
      : kind(k), intVal(i), setVal(std::move(s)), name(std::move(n)),
        a(std::move(x)), b(std::move(y)) {
    std::size_t h = static_cast<std::size_t>(kind) * 0x9e3779b97f4a7c15ULL;
    h ^= std::hash<long long>{}(intVal) + (h << 6);
    for (long long e : setVal.elems) h ^= std::hash<long long>{}(e) + (h << 6) + (h >> 2);
    h ^= std::hash<std::string>{}(name) + (h << 6);
    if (a) h ^= a->hash + 0x9e3779b9 + (h << 6) + (h >> 2);
    if (b) h ^= b->hash + 0x7f4a7c15 + (h << 6) + (h >> 2);
    hash = h;
  }
};

inline ExprRef intLit(long long v) {
  return std::make_shared<Expr>(ExprKind::IntLit, v, SetVal{}, "", nullptr, nullptr);
}
inline ExprRef setLit(SetVal s) {
  return std::make_shared<Expr>(ExprKind::SetLit, 0, std::move(s), "", nullptr, nullptr);
}
inline ExprRef varRef(std::string name) {
  return std::make_shared<Expr>(ExprKind::Var, 0, SetVal{}, std::move(name), nullptr, nullptr);
}
inline ExprRef mkExpr(ExprKind k, ExprRef a, ExprRef b = nullptr) {
  // canonical form: singletons of integer literals are set literals
  if (k == ExprKind::SetSingleton && a && a->kind == ExprKind::IntLit)
    return setLit(SetVal{{a->intVal}});
  return std::make_shared<Expr>(k, 0, SetVal{}, "", std::move(a), std::move(b));
}

inline bool structEq(const ExprRef& x, const ExprRef& y) {
  if (x == y) return true;
  if (!x || !y) return false;
  if (x->hash != y->hash || x->kind != y->kind) return false;
  return x->intVal == y->intVal && x->setVal == y->setVal &&
         x->name == y->name && structEq(x->a, y->a) && structEq(x->b, y->b);
}

// ---------------------------------------------------------------------------
// Boolean expressions (program guards and assertion atoms)
// ---------------------------------------------------------------------------

struct BoolExpr;
using BoolRef = std::shared_ptr<const BoolExpr>;

enum class BoolKind { Lit, Eq, Lt, Le, Member, And, Or, Not };

struct BoolExpr {
  BoolKind kind;
  bool lit = false;       // Lit
  ExprRef e1, e2;         // comparisons / Member
  BoolRef b1, b2;         // connectives
  std::size_t hash = 0;

  BoolExpr(BoolKind k, bool l, ExprRef x, ExprRef y, BoolRef p, BoolRef q)
      : kind(k), lit(l), e1(std::move(x)), e2(std::move(y)), b1(std::move(p)),
        b2(std::move(q)) {
    std::size_t h = static_cast<std::size_t>(kind) * 0xc2b2ae3d27d4eb4fULL;
    h ^= static_cast<std::size_t>(lit) + (h << 6);
    if (e1) h ^= e1->hash + (h << 6) + (h >> 2);
    if (e2) h ^= e2->hash + (h << 5) + (h >> 3);
    if (b1) h ^= b1->hash + (h << 6) + (h >> 2);
    if (b2) h ^= b2->hash + (h << 5) + (h >> 3);
    hash = h;
  }
};

inline BoolRef boolLit(bool v) {
  return std::make_shared<BoolExpr>(BoolKind::Lit, v, nullptr, nullptr, nullptr, nullptr);
}
inline BoolRef mkCmp(BoolKind k, ExprRef a, ExprRef b) {
  return std::make_shared<BoolExpr>(k, false, std::move(a), std::move(b), nullptr, nullptr);
}
inline BoolRef mkBool(BoolKind k, BoolRef a, BoolRef b = nullptr) {
  return std::make_shared<BoolExpr>(k, false, nullptr, nullptr, std::move(a), std::move(b));
}
inline BoolRef mkNot(BoolRef a) { return mkBool(BoolKind::Not, std::move(a)); }

inline bool structEq(const BoolRef& x, const BoolRef& y) {
  if (x == y) return true;
  if (!x || !y) return false;
  if (x->hash != y->hash || x->kind != y->kind || x->lit != y->lit) return false;
  return structEq(x->e1, y->e1) && structEq(x->e2, y->e2) &&
         structEq(x->b1, y->b1) && structEq(x->b2, y->b2);
}

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

struct Stmt;
using StmtRef = std::shared_ptr<const Stmt>;

enum class StmtKind { Skip, Assign, NondetAssign, Test, Choice, While, Seq, Assert };

struct Stmt {
  StmtKind kind;
  std::string var;     // Assign / NondetAssign
  ExprRef e1, e2;      // rhs / nondet bounds
  BoolRef guard;       // Test / While / Assert
  StmtRef s1, s2;      // children
  std::size_t hash = 0;

  Stmt(StmtKind k, std::string v, ExprRef x, ExprRef y, BoolRef g, StmtRef a,
       StmtRef b)
      : kind(k), var(std::move(v)), e1(std::move(x)), e2(std::move(y)),
        guard(std::move(g)), s1(std::move(a)), s2(std::move(b)) {
    std::size_t h = static_cast<std::size_t>(kind) * 0x165667b19e3779f9ULL;
    h ^= std::hash<std::string>{}(var) + (h << 6);
    if (e1) h ^= e1->hash + (h << 6) + (h >> 2);
    if (e2) h ^= e2->hash + (h << 5) + (h >> 3);
    if (guard) h ^= guard->hash + (h << 6) + (h >> 2);
    if (s1) h ^= s1->hash + (h << 6) + (h >> 2);
    if (s2) h ^= s2->hash + (h << 5) + (h >> 3);
    hash = h;
  }
};

inline StmtRef skipStmt() {
  static StmtRef s = std::make_shared<Stmt>(StmtKind::Skip, "", nullptr,
                                            nullptr, nullptr, nullptr, nullptr);
  return s;
}
inline StmtRef assignStmt(std::string var, ExprRef e) {
  return std::make_shared<Stmt>(StmtKind::Assign, std::move(var), std::move(e),
                                nullptr, nullptr, nullptr, nullptr);
}
inline StmtRef nondetStmt(std::string var, ExprRef lo, ExprRef hi) {
  return std::make_shared<Stmt>(StmtKind::NondetAssign, std::move(var),
                                std::move(lo), std::move(hi), nullptr, nullptr,
                                nullptr);
}
inline StmtRef testStmt(BoolRef g) {
  return std::make_shared<Stmt>(StmtKind::Test, "", nullptr, nullptr,
                                std::move(g), nullptr, nullptr);
}
inline StmtRef assertStmt(BoolRef g) {
  return std::make_shared<Stmt>(StmtKind::Assert, "", nullptr, nullptr,
                                std::move(g), nullptr, nullptr);
}
inline StmtRef choiceStmt(StmtRef a, StmtRef b) {
  return std::make_shared<Stmt>(StmtKind::Choice, "", nullptr, nullptr,
                                nullptr, std::move(a), std::move(b));
}
inline StmtRef whileStmt(BoolRef g, StmtRef body) {
  return std::make_shared<Stmt>(StmtKind::While, "", nullptr, nullptr,
                                std::move(g), std::move(body), nullptr);
}
inline StmtRef seqStmt(StmtRef a, StmtRef b) {
  return std::make_shared<Stmt>(StmtKind::Seq, "", nullptr, nullptr, nullptr,
                                std::move(a), std::move(b));
}

inline bool structEq(const StmtRef& x, const StmtRef& y) {
  if (x == y) return true;
  if (!x || !y) return false;
  if (x->hash != y->hash || x->kind != y->kind || x->var != y->var)
    return false;
  return structEq(x->e1, y->e1) && structEq(x->e2, y->e2) &&
         structEq(x->guard, y->guard) && structEq(x->s1, y->s1) &&
         structEq(x->s2, y->s2);
}

struct StmtHash {
  std::size_t operator()(const StmtRef& s) const { return s ? s->hash : 0; }
};
struct StmtEq {
  bool operator()(const StmtRef& a, const StmtRef& b) const {
    return structEq(a, b);
  }
};

// Right-associated view of sequences: first atomic-or-loop statement + rest.
// Returns {s, nullptr} when s is not a sequence.
inline std::pair<StmtRef, StmtRef> splitSeq(const StmtRef& s) {
  if (!s || s->kind != StmtKind::Seq) return {s, nullptr};
  auto [first, mid] = splitSeq(s->s1);
  StmtRef rest = mid ? seqStmt(mid, s->s2) : s->s2;
  return {first, rest};
}

// Canonical sequencing: drops skip units and right-rotates, so structurally
// equal programs stay equal however they were assembled.
inline StmtRef seqOrSkip(StmtRef a, StmtRef b) {
  if (!a || a->kind == StmtKind::Skip) return b ? b : skipStmt();
  if (!b || b->kind == StmtKind::Skip) return a;
  if (a->kind == StmtKind::Seq)
    return seqOrSkip(a->s1, seqOrSkip(a->s2, std::move(b)));
  return seqStmt(std::move(a), std::move(b));
}

// ---------------------------------------------------------------------------
// Declarations
// ---------------------------------------------------------------------------

struct ProgramDecl {
  // Order matters: it fixes the state-space enumeration.
  std::vector<std::pair<std::string, Sort>> vars;
  std::map<std::string, Value> constants;

  const Sort* sortOf(const std::string& name) const {
    for (auto& [n, s] : vars)
      if (n == name) return &s;
    return nullptr;
  }
  bool isConst(const std::string& name) const {
    return constants.count(name) > 0;
  }
};

}  // namespace refine
