#include "ertkit/types.hpp"

namespace ertkit {

std::string to_string(Group g) {
  return g == Group::control ? "control" : "dyslexic";
}

std::string to_string(Feature f) {
  switch (f) {
    case Feature::length: return "length";
    case Feature::zipf: return "zipf";
    default: return "surprisal";
  }
}

std::string to_string(Family f) {
  return f == Family::binomial_logit ? "binomial_logit" : "gaussian_log";
}

std::string to_string(Pathway p) {
  switch (p) {
    case Pathway::skip: return "skip";
    case Pathway::duration: return "duration";
    default: return "ert";
  }
}

std::string to_string(Constraint c) {
  switch (c) {
    case Constraint::none: return "none";
    case Constraint::monotone_inc: return "monotone_inc";
    default: return "monotone_dec";
  }
}

Group group_from_string(const std::string& s) {
  if (s == "control") return Group::control;
  if (s == "dyslexic") return Group::dyslexic;
  throw validation_error("unknown group label: '" + s + "'");
}

Feature feature_from_string(const std::string& s) {
  if (s == "length") return Feature::length;
  if (s == "zipf") return Feature::zipf;
  if (s == "surprisal") return Feature::surprisal;
  throw validation_error("unknown feature: '" + s + "'");
}

Family family_from_string(const std::string& s) {
  if (s == "binomial_logit") return Family::binomial_logit;
  if (s == "gaussian_log") return Family::gaussian_log;
  throw validation_error("unknown family: '" + s + "'");
}

Constraint constraint_from_string(const std::string& s) {
  if (s == "none") return Constraint::none;
  if (s == "monotone_inc" || s == "inc") return Constraint::monotone_inc;
  if (s == "monotone_dec" || s == "dec") return Constraint::monotone_dec;
  throw validation_error("unknown constraint: '" + s + "'");
}

}  // namespace ertkit
