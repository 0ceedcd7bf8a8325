#pragma once

#include <string>

#include <json.hpp>

#include "refine/properties.hpp"

namespace refine {

// Machine-readable verdict records. Timing is deliberately kept out of the
// json-lines output so reports stay byte-identical across runs; the human
// text output carries timings instead.

using Json = nlohmann::json;

inline std::string maskString(const StateSet& x) {
  std::string s(x.size(), '0');
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x.test(i)) s[i] = '1';
  return s;
}

inline Json toJson(const PropertyOutcome& o) {
  Json j;
  j["cmd"] = "fuzz";
  j["property"] = o.property;
  j["seed"] = o.seed;
  j["count"] = o.count;
  j["passed"] = o.passed;
  j["failed"] = o.failed;
  j["failures"] = o.failures;
  return j;
}

inline Json relVerdictJson(const RelVerdict& v, const StateSpace& lowSpace,
                           const StateSpace& highSpace) {
  Json j;
  j["verdict"] = v.valid ? "valid" : "invalid";
  if (v.cex) {
    Json c;
    c["low_initial"] = stateToString(lowSpace, v.cex->lowInit);
    c["high_initial"] = stateToString(highSpace, v.cex->highInit);
    c["high_program"] = printStmt(v.cex->highProg);
    if (v.cex->lowFinal)
      c["low_final"] = stateToString(lowSpace, *v.cex->lowFinal);
    c["reason"] = v.cex->reason;
    j["counterexample"] = c;
  } else {
    j["counterexample"] = nullptr;
  }
  return j;
}

inline Json stdVerdictJson(const StdVerdict& v, const StateSpace& space) {
  Json j;
  j["verdict"] = v.valid ? "valid" : "invalid";
  if (v.cex) {
    Json c;
    c["initial"] = stateToString(space, v.cex->initial);
    if (v.cex->final)
      c["final"] = stateToString(space, *v.cex->final);
    else
      c["error"] = true;
    j["counterexample"] = c;
  } else {
    j["counterexample"] = nullptr;
  }
  return j;
}

inline Json toJson(const ProofReport& rep) {
  Json j;
  j["cmd"] = "prove";
  switch (rep.outcome) {
    case ProofReport::Certified: j["verdict"] = "certified"; break;
    case ProofReport::ObligationFailed: j["verdict"] = "obligation-failed"; break;
    case ProofReport::StructuralError: j["verdict"] = "structural-error"; break;
    case ProofReport::OracleDisagreement: j["verdict"] = "oracle-disagreement"; break;
  }
  Json obs = Json::array();
  for (const auto& o : rep.obligations) {
    Json jo;
    jo["id"] = o.id;
    jo["desc"] = o.desc;
    jo["result"] = o.ok ? "ok" : "fail";
    if (!o.ok) jo["message"] = o.message;
    obs.push_back(jo);
  }
  j["obligations"] = obs;
  if (!rep.structuralError.empty()) j["error"] = rep.structuralError;
  if (!rep.oracleNote.empty()) j["oracle"] = rep.oracleNote;
  return j;
}

}  // namespace refine
