#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "refine/execpred.hpp"

namespace refine {

// ---------------------------------------------------------------------------
// Normal form for Exec-bearing low-level assertions: a disjunction of
// binder-indexed ground disjuncts, each with at most one Exec atom. This is
// the decomposed shape the proof rules operate on.
// ---------------------------------------------------------------------------

struct NfDisjunct {
  std::vector<std::pair<std::string, Sort>> binders;
  std::vector<StateSet> low;   // per binder valuation, over the low space
  StmtRef prog;                // null when the disjunct has no Exec atom
  std::vector<StateSet> high;  // per binder valuation, over the high space
};

struct NormalForm {
  std::vector<NfDisjunct> disjuncts;
  bool hasExec() const {
    for (auto& d : disjuncts)
      if (d.prog) return true;
    return false;
  }
};

namespace detail {

struct RawDisjunct {
  std::vector<std::pair<std::string, Sort>> binders;
  std::vector<AssertRef> lowConjs;
  AssertRef execHigh;
  StmtRef execProg;
};

inline void flattenAssert(const AssertRef& a, std::vector<RawDisjunct>& out) {
  switch (a->kind) {
    case AsrtKind::Pred:
      out.push_back(RawDisjunct{{}, {a}, nullptr, nullptr});
      return;
    case AsrtKind::Exec:
      out.push_back(RawDisjunct{{}, {}, a->execHigh, a->execProg});
      return;
    case AsrtKind::Or: {
      flattenAssert(a->a1, out);
      flattenAssert(a->a2, out);
      return;
    }
    case AsrtKind::Exists: {
      std::vector<RawDisjunct> body;
      flattenAssert(a->a1, body);
      for (auto& d : body) {
        for (auto& [n, s] : d.binders)
          if (n == a->binderName)
            throw LoadError("binder '" + n + "' shadowed under exists");
        d.binders.insert(d.binders.begin(), {a->binderName, a->binderSort});
        out.push_back(std::move(d));
      }
      return;
    }
    case AsrtKind::And: {
      std::vector<RawDisjunct> l, r;
      flattenAssert(a->a1, l);
      flattenAssert(a->a2, r);
      for (const auto& dl : l)
        for (const auto& dr : r) {
          RawDisjunct d = dl;
          for (auto& [n, s] : dr.binders) {
            for (auto& [n2, s2] : d.binders)
              if (n == n2)
                throw LoadError("binder '" + n +
                                "' appears on both sides of a conjunction");
            d.binders.emplace_back(n, s);
          }
          for (auto& c : dr.lowConjs) d.lowConjs.push_back(c);
          if (dr.execProg) {
            if (d.execProg)
              throw LoadError(
                  "assertion is not in decomposed form: two Exec atoms "
                  "under one conjunction");
            d.execHigh = dr.execHigh;
            d.execProg = dr.execProg;
          }
          out.push_back(std::move(d));
        }
      return;
    }
  }
}

}  // namespace detail

// Grounds an assertion into normal form. `rigid` holds logical constants
// already in scope (script-introduced binders); per-disjunct binders are
// enumerated on top of it.
inline NormalForm normalize(const AssertRef& a, const StateSpace& lowSpace,
                            const StateSpace* highSpace,
                            const LogicalEnv& rigid) {
  std::vector<detail::RawDisjunct> raw;
  detail::flattenAssert(a, raw);
  NormalForm nf;
  for (auto& rd : raw) {
    NfDisjunct d;
    d.binders = rd.binders;
    d.prog = rd.execProg;
    AssertRef lowConj;
    for (auto& c : rd.lowConjs)
      lowConj = lowConj ? andAssert(lowConj, c) : c;
    if (!lowConj) lowConj = trueAssert();
    BinderIter it(d.binders);
    for (std::uint64_t v = 0; v < it.count(); ++v) {
      LogicalEnv env = rigid;
      for (auto& b : it.envAt(v)) env.push_back(b);
      d.low.push_back(groundAssert(lowConj, lowSpace, env));
      if (d.prog) {
        if (!highSpace)
          throw LoadError("Exec atom used without a high-level declaration");
        d.high.push_back(groundAssert(rd.execHigh, *highSpace, env));
      }
    }
    nf.disjuncts.push_back(std::move(d));
  }
  return nf;
}

// ---------------------------------------------------------------------------
// Entailment
// ---------------------------------------------------------------------------

enum class EntailMode { SemanticAllX, Structural };

struct EntailResult {
  bool ok = true;
  std::string message;  // counterexample description on failure
};

namespace detail {

inline void collectVars(const ExprRef& e, std::set<std::string>& out) {
  if (!e) return;
  if (e->kind == ExprKind::Var) out.insert(e->name);
  collectVars(e->a, out);
  collectVars(e->b, out);
}
inline void collectVars(const BoolRef& b, std::set<std::string>& out) {
  if (!b) return;
  collectVars(b->e1, out);
  collectVars(b->e2, out);
  collectVars(b->b1, out);
  collectVars(b->b2, out);
}
inline void collectVars(const AssertRef& a, std::set<std::string>& out) {
  if (!a) return;
  collectVars(a->pred, out);
  collectVars(a->a1, out);
  collectVars(a->a2, out);
  collectVars(a->execHigh, out);
}
inline void collectVars(const std::vector<RuleApp>& chain,
                        std::set<std::string>& out) {
  for (const auto& r : chain) {
    collectVars(r.nondetValue, out);
    collectVars(r.focusIntermediate, out);
    collectVars(r.nested, out);
  }
}

inline std::string describeEnv(const LogicalEnv& env) {
  if (env.empty()) return "";
  std::string s = " with ";
  for (std::size_t i = 0; i < env.size(); ++i) {
    if (i) s += ", ";
    s += env[i].first + "=" + toString(env[i].second);
  }
  return s;
}

}  // namespace detail

// Structural entailment: every state admitted by a source disjunct instance
// must be covered by some target instance; Exec atoms are related by the
// supplied rule chain (applied to the source atom) plus monotonicity, never
// by enumerating X.
inline EntailResult entailsStructural(const NormalForm& from,
                                      const NormalForm& to,
                                      const std::vector<RuleApp>& chain,
                                      Interp& low, Interp* high,
                                      const LogicalEnv& rigid) {
  // Does the chain mention target binders? Then it must be re-evaluated per
  // candidate target instance (e.g. picking a nondet value named by the
  // target's binder).
  std::set<std::string> chainVars;
  detail::collectVars(chain, chainVars);
  auto chainMentions = [&](const NfDisjunct& dt) {
    for (auto& [n, s] : dt.binders)
      if (chainVars.count(n)) return true;
    return false;
  };

  for (const auto& da : from.disjuncts) {
    BinderIter ia(da.binders);
    for (std::uint64_t va = 0; va < ia.count(); ++va) {
      const StateSet& lowA = da.low[va];
      if (!lowA.any()) continue;  // vacuous instance
      LogicalEnv envA = rigid;
      for (auto& b : ia.envAt(va)) envA.push_back(b);

      if (!da.prog && !chain.empty())
        return {false, "exec rule chain given, but the assertion has no Exec atom"};

      // Chain result shared by all candidates that do not bind chain vars.
      std::optional<GroundExec> sharedExec;
      std::string chainError;
      if (da.prog) {
        RuleResult r = applyChain(GroundExec{da.high[va], da.prog}, chain,
                                  *high, envA);
        if (ruleOk(r))
          sharedExec = std::get<GroundExec>(std::move(r));
        else
          chainError = std::get<RuleError>(r).message;
      }

      for (std::size_t sl = lowA.find_first(); sl != StateSet::npos;
           sl = lowA.find_next(sl)) {
        bool covered = false;
        for (const auto& dt : to.disjuncts) {
          if (covered) break;
          bool perCandidate = dt.prog && chainMentions(dt);
          BinderIter itT(dt.binders);
          for (std::uint64_t vt = 0; vt < itT.count(); ++vt) {
            if (!dt.low[vt].test(sl)) continue;
            if (!dt.prog) {
              covered = true;  // target instance has no Exec constraint
              break;
            }
            if (!da.prog) continue;  // cannot introduce an Exec atom
            const GroundExec* ge = nullptr;
            GroundExec local;
            if (perCandidate) {
              LogicalEnv envAT = envA;
              for (auto& b : itT.envAt(vt)) envAT.push_back(b);
              RuleResult r = applyChain(GroundExec{da.high[va], da.prog},
                                        chain, *high, envAT);
              if (!ruleOk(r)) {
                chainError = std::get<RuleError>(r).message;
                continue;
              }
              local = std::get<GroundExec>(std::move(r));
              ge = &local;
            } else {
              if (!sharedExec) continue;
              ge = &*sharedExec;
            }
            if (structEq(ge->prog, dt.prog) &&
                ge->states.is_subset_of(dt.high[vt])) {
              covered = true;
              break;
            }
          }
        }
        if (!covered) {
          std::string msg = "state " + stateToString(low.space(), sl) +
                            detail::describeEnv(envA) + " is not covered";
          if (!chainError.empty()) msg += "; last rule failure: " + chainError;
          return {false, msg};
        }
      }
    }
  }
  return {true, ""};
}

// Semantic entailment, quantifying X over every subset of the high space
// (within the cap). Used by oracles and property suites.
inline EntailResult entailsSemanticAllX(const AssertRef& a1,
                                        const AssertRef& a2, Interp& low,
                                        Interp* high, const LogicalEnv& rigid,
                                        std::size_t capStates = 16) {
  bool needX = containsExec(a1) || containsExec(a2);
  const StateSpace& ls = low.space();
  if (!needX) {
    HoldCtx ctx{&ls, nullptr, nullptr};
    for (std::size_t s = 0; s < ls.size(); ++s) {
      LogicalEnv env = rigid;
      if (holds(a1, s, ctx, env) && !holds(a2, s, ctx, env))
        return {false, "state " + stateToString(ls, s)};
    }
    return {true, ""};
  }
  if (!high) throw LoadError("Exec atoms need a high-level declaration");
  requireEnumerable(high->space(), capStates, "semantic entailment");
  std::size_t n = high->space().size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    StateSet x = subsetFromMask(mask, n);
    HoldCtx ctx{&ls, high, &x};
    for (std::size_t s = 0; s < ls.size(); ++s) {
      LogicalEnv env = rigid;
      if (holds(a1, s, ctx, env) && !holds(a2, s, ctx, env))
        return {false, "state " + stateToString(ls, s) + " under X mask " +
                           std::to_string(mask)};
    }
  }
  return {true, ""};
}

// Forward image of a set through one statement.
inline StateSet imageSet(const Denotation& d, const StateSet& pre) {
  StateSet out(pre.size());
  for (std::size_t s = pre.find_first(); s != StateSet::npos;
       s = pre.find_next(s))
    out |= d.nrm[s];
  return out;
}

}  // namespace refine
