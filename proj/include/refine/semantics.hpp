#pragma once

#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "refine/state.hpp"

namespace refine {

// Error-aware denotation: nrm relates initial states to normal-termination
// states, err holds the states from which execution may fault.
struct Denotation {
  std::vector<StateSet> nrm;  // nrm[src] = targets
  StateSet err;

  explicit Denotation(std::size_t n) : nrm(n, StateSet(n)), err(n) {}

  bool operator==(const Denotation& o) const {
    return nrm == o.nrm && err == o.err;
  }
};
using DenotationPtr = std::shared_ptr<const Denotation>;

// Guard evaluation over a whole space, split into true / false / fault states.
struct GuardSets {
  StateSet yes, no, fault;
};

inline GuardSets evalGuard(const BoolRef& g, const StateSpace& space) {
  GuardSets gs{space.emptySet(), space.emptySet(), space.emptySet()};
  for (std::size_t i = 0; i < space.size(); ++i) {
    EvalEnv env{&space, i, nullptr};
    auto r = evalBool(g, env);
    if (!r)
      gs.fault.set(i);
    else if (*r)
      gs.yes.set(i);
    else
      gs.no.set(i);
  }
  return gs;
}

// Denotation interpreter for one state space, memoized per statement
// (structural identity). Loop denotations are least fixpoints computed by
// Kleene iteration; finiteness guarantees stabilization.
class Interp {
public:
  explicit Interp(const StateSpace& space) : space_(space) {}

  const StateSpace& space() const { return space_; }

  const Denotation& denote(const StmtRef& c) {
    auto it = memo_.find(c);
    if (it != memo_.end()) return *it->second;
    auto d = std::make_shared<Denotation>(compute(c));
    auto [pos, _] = memo_.emplace(c, std::move(d));
    return *pos->second;
  }

  StateSet terminalSet(std::uint64_t state, const StmtRef& c) {
    return denote(c).nrm[state];
  }

  // wlp(c, X) = { s | s not in err(c) and every normal successor lies in X }.
  StateSet wlp(const StmtRef& c, const StateSet& post) {
    const Denotation& d = denote(c);
    StateSet r(space_.size());
    for (std::size_t i = 0; i < space_.size(); ++i)
      if (!d.err.test(i) && d.nrm[i].is_subset_of(post)) r.set(i);
    return r;
  }

  // (s1, c1) is refined by (s2, c2): every terminal of the right
  // configuration is a terminal of the left, and errors are simulated.
  bool configRefines(std::uint64_t s1, const StmtRef& c1, std::uint64_t s2,
                     const StmtRef& c2) {
    const Denotation& d1 = denote(c1);
    const Denotation& d2 = denote(c2);
    if (d2.err.test(s2) && !d1.err.test(s1)) return false;
    return d2.nrm[s2].is_subset_of(d1.nrm[s1]);
  }

  // refinementMatrix(c1, c2)[s1] = set of s2 with (s1,c1) refined-by (s2,c2).
  const std::vector<StateSet>& refinementMatrix(const StmtRef& c1,
                                                const StmtRef& c2) {
    auto key = std::make_pair(c1, c2);
    auto it = refMemo_.find(key);
    if (it != refMemo_.end()) return it->second;
    const Denotation& d1 = denote(c1);
    const Denotation& d2 = denote(c2);
    std::vector<StateSet> m(space_.size(), StateSet(space_.size()));
    for (std::size_t s1 = 0; s1 < space_.size(); ++s1)
      for (std::size_t s2 = 0; s2 < space_.size(); ++s2) {
        if (d2.err.test(s2) && !d1.err.test(s1)) continue;
        if (d2.nrm[s2].is_subset_of(d1.nrm[s1])) m[s1].set(s2);
      }
    auto [pos, _] = refMemo_.emplace(key, std::move(m));
    return pos->second;
  }

private:
  Denotation compute(const StmtRef& c) {
    const std::size_t n = space_.size();
    Denotation d(n);
    switch (c->kind) {
      case StmtKind::Skip:
        for (std::size_t i = 0; i < n; ++i) d.nrm[i].set(i);
        return d;
      case StmtKind::Assign: {
        int vi = space_.indexOfVar(c->var);
        for (std::size_t i = 0; i < n; ++i) {
          EvalEnv env{&space_, i, nullptr};
          auto v = evalExpr(c->e1, env);
          if (!v) {
            d.err.set(i);
            continue;
          }
          auto j = space_.withVar(i, vi, *v);
          if (!j)
            d.err.set(i);  // out-of-sort result is an error transition
          else
            d.nrm[i].set(*j);
        }
        return d;
      }
      case StmtKind::NondetAssign: {
        int vi = space_.indexOfVar(c->var);
        const IntRange sortRange =
            space_.decl().vars[static_cast<std::size_t>(vi)].second.intRange();
        for (std::size_t i = 0; i < n; ++i) {
          EvalEnv env{&space_, i, nullptr};
          auto lo = evalExpr(c->e1, env), hi = evalExpr(c->e2, env);
          if (!lo || !hi || !lo->isInt() || !hi->isInt()) {
            d.err.set(i);
            continue;
          }
          long long a = lo->asInt(), b = hi->asInt();
          if (a > b) continue;  // inverted range blocks, like a failed test
          if (a < sortRange.lo || b > sortRange.hi) d.err.set(i);
          long long from = std::max(a, sortRange.lo);
          long long to = std::min(b, sortRange.hi);
          for (long long v = from; v <= to; ++v) {
            auto j = space_.withVar(i, vi, Value(v));
            d.nrm[i].set(*j);
          }
        }
        return d;
      }
      case StmtKind::Test: {
        GuardSets gs = evalGuard(c->guard, space_);
        for (std::size_t i = 0; i < n; ++i)
          if (gs.yes.test(i)) d.nrm[i].set(i);
        d.err = gs.fault;
        return d;
      }
      case StmtKind::Assert: {
        GuardSets gs = evalGuard(c->guard, space_);
        for (std::size_t i = 0; i < n; ++i)
          if (gs.yes.test(i)) d.nrm[i].set(i);
        d.err = gs.no | gs.fault;
        return d;
      }
      case StmtKind::Choice: {
        const Denotation& a = denote(c->s1);
        const Denotation& b = denote(c->s2);
        for (std::size_t i = 0; i < n; ++i) d.nrm[i] = a.nrm[i] | b.nrm[i];
        d.err = a.err | b.err;
        return d;
      }
      case StmtKind::Seq: {
        const Denotation& a = denote(c->s1);
        const Denotation& b = denote(c->s2);
        d.err = a.err;
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = a.nrm[i].find_first(); j != StateSet::npos;
               j = a.nrm[i].find_next(j)) {
            d.nrm[i] |= b.nrm[j];
            if (b.err.test(j)) d.err.set(i);
          }
        }
        return d;
      }
      case StmtKind::While: {
        GuardSets gs = evalGuard(c->guard, space_);
        const Denotation& body = denote(c->s1);
        // nrm fixpoint: R = [no]id  U  [yes](body ; R)
        bool changed = true;
        while (changed) {
          changed = false;
          for (std::size_t i = 0; i < n; ++i) {
            StateSet row(n);
            if (gs.no.test(i)) row.set(i);
            if (gs.yes.test(i)) {
              for (std::size_t j = body.nrm[i].find_first();
                   j != StateSet::npos; j = body.nrm[i].find_next(j))
                row |= d.nrm[j];
            }
            if (row != d.nrm[i]) {
              d.nrm[i] = std::move(row);
              changed = true;
            }
          }
        }
        // err fixpoint: E = guard-fault  U  [yes](body errs)  U  [yes](body ; E)
        d.err = gs.fault;
        changed = true;
        while (changed) {
          changed = false;
          for (std::size_t i = 0; i < n; ++i) {
            if (d.err.test(i) || !gs.yes.test(i)) continue;
            bool hit = body.err.test(i);
            if (!hit) {
              for (std::size_t j = body.nrm[i].find_first();
                   j != StateSet::npos; j = body.nrm[i].find_next(j))
                if (d.err.test(j)) {
                  hit = true;
                  break;
                }
            }
            if (hit) {
              d.err.set(i);
              changed = true;
            }
          }
        }
        return d;
      }
    }
    return d;
  }

  struct PairHash {
    std::size_t operator()(const std::pair<StmtRef, StmtRef>& p) const {
      return (p.first ? p.first->hash : 0) * 31 ^ (p.second ? p.second->hash : 0);
    }
  };
  struct PairEq {
    bool operator()(const std::pair<StmtRef, StmtRef>& a,
                    const std::pair<StmtRef, StmtRef>& b) const {
      return structEq(a.first, b.first) && structEq(a.second, b.second);
    }
  };

  const StateSpace& space_;
  std::unordered_map<StmtRef, DenotationPtr, StmtHash, StmtEq> memo_;
  std::unordered_map<std::pair<StmtRef, StmtRef>, std::vector<StateSet>,
                     PairHash, PairEq>
      refMemo_;
};

// ---------------------------------------------------------------------------
// Subset enumeration
// ---------------------------------------------------------------------------

inline StateSet subsetFromMask(std::uint64_t mask, std::size_t n) {
  StateSet s(n);
  for (std::size_t i = 0; i < n; ++i)
    if (mask & (std::uint64_t{1} << i)) s.set(i);
  return s;
}

inline void requireEnumerable(const StateSpace& space, std::size_t capStates,
                              const char* what) {
  if (space.size() > capStates)
    throw CapExceeded(std::string(what) + ": space has " +
                      std::to_string(space.size()) + " states, cap is " +
                      std::to_string(capStates));
}

// ---------------------------------------------------------------------------
// Decomposition check: configuration refinement (a) versus the wlp
// implication quantified over every postcondition set (b).
// ---------------------------------------------------------------------------

struct DecompositionResult {
  bool refines = false;        // (a)
  bool allX = false;           // (b)
  bool agree = false;
  bool initialErrs = false;    // s1 is an error state of c1
  // When (a) fails, the terminal set of (s1, c1) must falsify (b).
  bool canonicalWitnessFalsifies = false;
  std::optional<StateSet> witnessX;
};

inline DecompositionResult checkDecomposition(Interp& interp, std::uint64_t s1,
                                              const StmtRef& c1,
                                              std::uint64_t s2,
                                              const StmtRef& c2,
                                              std::size_t capStates = 16) {
  requireEnumerable(interp.space(), capStates, "decomposition check");
  const std::size_t n = interp.space().size();
  DecompositionResult r;
  r.refines = interp.configRefines(s1, c1, s2, c2);
  r.initialErrs = interp.denote(c1).err.test(s1);
  r.allX = true;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    StateSet x = subsetFromMask(mask, n);
    if (interp.wlp(c1, x).test(s1) && !interp.wlp(c2, x).test(s2)) {
      r.allX = false;
      r.witnessX = x;
      break;
    }
  }
  StateSet canonical = interp.terminalSet(s1, c1);
  r.canonicalWitnessFalsifies = interp.wlp(c1, canonical).test(s1) &&
                                !interp.wlp(c2, canonical).test(s2);
  r.agree = (r.refines == r.allX);
  return r;
}

}  // namespace refine
