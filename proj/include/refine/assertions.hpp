#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "refine/pretty.hpp"
#include "refine/semantics.hpp"
#include "refine/typecheck.hpp"

namespace refine {

// ---------------------------------------------------------------------------
// Syntactic assertions. Exec atoms carry a high-level assertion (itself free
// of Exec atoms) and the remaining high-level program; they are evaluated
// against a postcondition set X supplied at satisfaction time.
// ---------------------------------------------------------------------------

struct SynAssertion;
using AssertRef = std::shared_ptr<const SynAssertion>;

enum class AsrtKind { Pred, And, Or, Exists, Exec };

struct SynAssertion {
  AsrtKind kind;
  BoolRef pred;             // Pred
  AssertRef a1, a2;         // And / Or
  std::string binderName;   // Exists
  Sort binderSort;          // Exists
  AssertRef execHigh;       // Exec: high-level assertion, no nested Exec
  StmtRef execProg;         // Exec: remaining high-level program
};

inline AssertRef predAssert(BoolRef b) {
  auto a = std::make_shared<SynAssertion>();
  a->kind = AsrtKind::Pred;
  a->pred = std::move(b);
  return a;
}
inline AssertRef trueAssert() { return predAssert(boolLit(true)); }
inline AssertRef falseAssert() { return predAssert(boolLit(false)); }
inline AssertRef andAssert(AssertRef x, AssertRef y) {
  auto a = std::make_shared<SynAssertion>();
  a->kind = AsrtKind::And;
  a->a1 = std::move(x);
  a->a2 = std::move(y);
  return a;
}
inline AssertRef orAssert(AssertRef x, AssertRef y) {
  auto a = std::make_shared<SynAssertion>();
  a->kind = AsrtKind::Or;
  a->a1 = std::move(x);
  a->a2 = std::move(y);
  return a;
}
inline AssertRef existsAssert(std::string name, Sort sort, AssertRef body) {
  auto a = std::make_shared<SynAssertion>();
  a->kind = AsrtKind::Exists;
  a->binderName = std::move(name);
  a->binderSort = std::move(sort);
  a->a1 = std::move(body);
  return a;
}
inline AssertRef execAssert(AssertRef high, StmtRef prog) {
  auto a = std::make_shared<SynAssertion>();
  a->kind = AsrtKind::Exec;
  a->execHigh = std::move(high);
  a->execProg = std::move(prog);
  return a;
}

inline bool containsExec(const AssertRef& a) {
  if (!a) return false;
  if (a->kind == AsrtKind::Exec) return true;
  return containsExec(a->a1) || containsExec(a->a2);
}

class MissingX : public std::runtime_error {
public:
  MissingX() : std::runtime_error("Exec atom evaluated without a bound X") {}
};

// ---------------------------------------------------------------------------
// Satisfaction
// ---------------------------------------------------------------------------

using LogicalEnv = std::vector<std::pair<std::string, Value>>;

struct HoldCtx {
  const StateSpace* space = nullptr;  // space of the states the assertion is about
  Interp* highInterp = nullptr;       // needed only when Exec atoms occur
  const StateSet* X = nullptr;        // postcondition set binding Exec atoms
};

// Satisfying set of an Exec-free assertion over a space, under an
// environment for the enclosing binders. A fault in a predicate makes the
// predicate false at that state.
inline StateSet groundAssert(const AssertRef& a, const StateSpace& space,
                             LogicalEnv& env);

// The execution predicate: some state satisfying `high` can run `prog`
// without error and end only inside X.
inline bool execHolds(const StateSet& highStates, const StmtRef& prog,
                      Interp& highInterp, const StateSet& X) {
  StateSet w = highInterp.wlp(prog, X);
  w &= highStates;
  return w.any();
}

inline bool holds(const AssertRef& a, std::uint64_t sigma, const HoldCtx& ctx,
                  LogicalEnv& env) {
  switch (a->kind) {
    case AsrtKind::Pred: {
      EvalEnv ee{ctx.space, sigma, &env};
      auto r = evalBool(a->pred, ee);
      return r && *r;
    }
    case AsrtKind::And:
      return holds(a->a1, sigma, ctx, env) && holds(a->a2, sigma, ctx, env);
    case AsrtKind::Or:
      return holds(a->a1, sigma, ctx, env) || holds(a->a2, sigma, ctx, env);
    case AsrtKind::Exists: {
      std::uint64_t card = a->binderSort.cardinality();
      for (std::uint64_t i = 0; i < card; ++i) {
        env.emplace_back(a->binderName, a->binderSort.valueAt(i));
        bool ok = holds(a->a1, sigma, ctx, env);
        env.pop_back();
        if (ok) return true;
      }
      return false;
    }
    case AsrtKind::Exec: {
      if (!ctx.X || !ctx.highInterp) throw MissingX();
      StateSet hs = groundAssert(a->execHigh, ctx.highInterp->space(), env);
      return execHolds(hs, a->execProg, *ctx.highInterp, *ctx.X);
    }
  }
  return false;
}

inline StateSet groundAssert(const AssertRef& a, const StateSpace& space,
                             LogicalEnv& env) {
  HoldCtx ctx{&space, nullptr, nullptr};
  StateSet r(space.size());
  for (std::size_t i = 0; i < space.size(); ++i)
    if (holds(a, i, ctx, env)) r.set(i);
  return r;
}

// Iterates all valuations of a binder list in a fixed mixed-radix order.
class BinderIter {
public:
  explicit BinderIter(const std::vector<std::pair<std::string, Sort>>& binders)
      : binders_(binders), digits_(binders.size(), 0) {
    count_ = 1;
    for (auto& [n, s] : binders_) count_ *= s.cardinality();
  }

  std::uint64_t count() const { return count_; }

  LogicalEnv envAt(std::uint64_t rank) const {
    LogicalEnv env;
    env.reserve(binders_.size());
    for (auto& [name, sort] : binders_) {
      std::uint64_t card = sort.cardinality();
      env.emplace_back(name, sort.valueAt(rank % card));
      rank /= card;
    }
    return env;
  }

private:
  const std::vector<std::pair<std::string, Sort>>& binders_;
  std::vector<std::uint64_t> digits_;
  std::uint64_t count_ = 1;
};

// ---------------------------------------------------------------------------
// Binary assertions over a pair of spaces, stored extensionally.
// ---------------------------------------------------------------------------

struct BinAssertion {
  std::size_t n1 = 0, n2 = 0;
  std::vector<StateSet> rows;  // rows[s1] = set of s2

  BinAssertion() = default;
  BinAssertion(std::size_t a, std::size_t b)
      : n1(a), n2(b), rows(a, StateSet(b)) {}

  void set(std::size_t s1, std::size_t s2) { rows[s1].set(s2); }
  bool test(std::size_t s1, std::size_t s2) const { return rows[s1].test(s2); }
  bool operator==(const BinAssertion&) const = default;
};

// Linking operator: sigma1 satisfies (P (.) Q) iff some sigma2 related by P
// satisfies Q.
inline StateSet linkBinUnary(const BinAssertion& p, const StateSet& q) {
  StateSet r(p.n1);
  for (std::size_t i = 0; i < p.n1; ++i) {
    if ((p.rows[i] & q).any()) r.set(i);
  }
  return r;
}

// Relational join over the shared middle space.
inline BinAssertion composeBin(const BinAssertion& p1, const BinAssertion& p2) {
  if (p1.n2 != p2.n1)
    throw LoadError("composed binary assertions disagree on the middle space");
  BinAssertion r(p1.n1, p2.n2);
  for (std::size_t i = 0; i < p1.n1; ++i)
    for (std::size_t j = p1.rows[i].find_first(); j != StateSet::npos;
         j = p1.rows[i].find_next(j))
      r.rows[i] |= p2.rows[j];
  return r;
}

inline BinAssertion identityBin(std::size_t n) {
  BinAssertion r(n, n);
  for (std::size_t i = 0; i < n; ++i) r.set(i, i);
  return r;
}

// ---------------------------------------------------------------------------
// Program-as-resource assertions, semantically: for each high-level program
// term, the set of (low state, high state) pairs satisfying the assertion.
// ---------------------------------------------------------------------------

struct RelAssertionSem {
  std::size_t nLow = 0, nHigh = 0;
  std::vector<StmtRef> progs;
  std::vector<BinAssertion> parts;  // parts[t] over nLow x nHigh

  RelAssertionSem() = default;
  RelAssertionSem(std::size_t l, std::size_t h) : nLow(l), nHigh(h) {}

  int indexOf(const StmtRef& p) const {
    for (std::size_t t = 0; t < progs.size(); ++t)
      if (structEq(progs[t], p)) return static_cast<int>(t);
    return -1;
  }
  int ensureProg(const StmtRef& p) {
    int t = indexOf(p);
    if (t >= 0) return t;
    progs.push_back(p);
    parts.emplace_back(nLow, nHigh);
    return static_cast<int>(progs.size()) - 1;
  }
  void add(std::size_t sl, std::size_t sh, const StmtRef& p) {
    parts[static_cast<std::size_t>(ensureProg(p))].set(sl, sh);
  }
  bool empty() const {
    for (auto& b : parts)
      for (auto& row : b.rows)
        if (row.any()) return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// Decomposed program-as-resource assertions (syntactic normal form):
// a finite disjunction of  exists a*. B /\ |low| /\ |high| /\ |prog|.
// ---------------------------------------------------------------------------

struct RelDisjunct {
  std::vector<std::pair<std::string, Sort>> binders;
  BoolRef pure;     // over logical variables only
  AssertRef low;    // no Exec atoms
  AssertRef high;   // no Exec atoms
  StmtRef prog;
};

struct DecomposedRel {
  std::vector<RelDisjunct> disjuncts;
};

inline RelAssertionSem semantify(const DecomposedRel& p,
                                 const StateSpace& lowSpace,
                                 const StateSpace& highSpace,
                                 const LogicalEnv& outer = {}) {
  RelAssertionSem sem(lowSpace.size(), highSpace.size());
  for (const auto& d : p.disjuncts) {
    int t = sem.ensureProg(d.prog);
    BinderIter it(d.binders);
    for (std::uint64_t r = 0; r < it.count(); ++r) {
      LogicalEnv env = outer;
      for (auto& b : it.envAt(r)) env.push_back(b);
      if (d.pure) {
        EvalEnv ee{nullptr, 0, &env};
        auto v = evalBool(d.pure, ee);
        if (!v || !*v) continue;
      }
      StateSet lo = groundAssert(d.low, lowSpace, env);
      if (!lo.any()) continue;
      StateSet hi = groundAssert(d.high, highSpace, env);
      if (!hi.any()) continue;
      auto& bin = sem.parts[static_cast<std::size_t>(t)];
      for (std::size_t sl = lo.find_first(); sl != StateSet::npos;
           sl = lo.find_next(sl))
        bin.rows[sl] |= hi;
    }
  }
  return sem;
}

// Semantic encoding: the low states from which some related high
// configuration can only finish inside X.
inline StateSet encode(const RelAssertionSem& p, const StateSet& x,
                       Interp& highInterp) {
  StateSet r(p.nLow);
  for (std::size_t t = 0; t < p.progs.size(); ++t) {
    StateSet w = highInterp.wlp(p.progs[t], x);
    for (std::size_t sl = 0; sl < p.nLow; ++sl)
      if ((p.parts[t].rows[sl] & w).any()) r.set(sl);
  }
  return r;
}

// Syntactic encoding: rewrites each disjunct, replacing the lifted high
// assertion and program by an Exec atom; X stays symbolic.
inline bool isTriviallyTrue(const AssertRef& a) {
  return a && a->kind == AsrtKind::Pred && a->pred->kind == BoolKind::Lit &&
         a->pred->lit;
}

inline AssertRef encodeSyntactic(const DecomposedRel& p) {
  AssertRef out;
  for (const auto& d : p.disjuncts) {
    AssertRef body = execAssert(d.high ? d.high : trueAssert(), d.prog);
    if (d.low && !isTriviallyTrue(d.low)) body = andAssert(d.low, body);
    if (d.pure && !(d.pure->kind == BoolKind::Lit && d.pure->lit))
      body = andAssert(predAssert(d.pure), body);
    for (auto it = d.binders.rbegin(); it != d.binders.rend(); ++it)
      body = existsAssert(it->first, it->second, body);
    out = out ? orAssert(out, body) : body;
  }
  return out ? out : falseAssert();
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

inline std::string printAssert(const AssertRef& a, int parentPrec = 0) {
  // 0 or, 1 and, 2 atom; exists extends to the right.
  int prec = 2;
  std::string s;
  switch (a->kind) {
    case AsrtKind::Pred:
      prec = 2;
      s = printBool(a->pred, 2);
      break;
    case AsrtKind::And:
      prec = 1;
      s = printAssert(a->a1, 1) + " && " + printAssert(a->a2, 2);
      break;
    case AsrtKind::Or:
      prec = 0;
      s = printAssert(a->a1, 0) + " || " + printAssert(a->a2, 1);
      break;
    case AsrtKind::Exists:
      prec = 0;
      s = "exists " + a->binderName + " : " + printSort(a->binderSort) + ". " +
          printAssert(a->a1, 0);
      break;
    case AsrtKind::Exec:
      prec = 2;
      s = "Exec[ " + printAssert(a->execHigh, 0) + " ; " +
          printStmt(a->execProg) + " ]";
      break;
  }
  if (prec < parentPrec) return "(" + s + ")";
  return s;
}

}  // namespace refine
