#ifndef ERTKIT_TYPES_HPP
#define ERTKIT_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ertkit {

template <class Scalar>
using VecX = Eigen::Vector<Scalar, Eigen::Dynamic>;
template <class Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vec = VecX<double>;
using Mat = MatX<double>;
using Index = Eigen::Index;

enum class Group { control, dyslexic };
enum class Feature { length, zipf, surprisal };
enum class Family { binomial_logit, gaussian_log };
enum class Pathway { skip, duration, ert };
enum class Constraint { none, monotone_inc, monotone_dec };

inline constexpr int kNFeatures = 3;
inline constexpr int kNGroups = 2;
inline constexpr int kNPathways = 3;
inline constexpr Feature kFeatures[kNFeatures] = {Feature::length, Feature::zipf,
                                                  Feature::surprisal};
inline constexpr Group kGroups[kNGroups] = {Group::control, Group::dyslexic};

/// Input data or configuration violates a documented contract.
class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed (non-convergence, separation, degeneracy).
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string to_string(Group g);
std::string to_string(Feature f);
std::string to_string(Family f);
std::string to_string(Pathway p);
std::string to_string(Constraint c);

Group group_from_string(const std::string& s);
Feature feature_from_string(const std::string& s);
Family family_from_string(const std::string& s);
Constraint constraint_from_string(const std::string& s);

}  // namespace ertkit

#endif
