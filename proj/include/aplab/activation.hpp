#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>

#include "aplab/errors.hpp"
#include "aplab/matrix.hpp"

namespace aplab {

enum class Activation : std::uint8_t {
  Identity = 0,
  ReLU = 1,
  LeakyReLU = 2,
  Sigmoid = 3,
  Tanh = 4,
};

struct ActivationKind {
  Activation kind = Activation::Identity;
  float leaky_slope = 0.01f;

  static ActivationKind identity() { return {Activation::Identity}; }
  static ActivationKind relu() { return {Activation::ReLU}; }
  static ActivationKind leaky_relu(float slope = 0.01f) {
    if (!(slope > 0.f)) throw InputError("leaky_relu: slope must be > 0");
    return {Activation::LeakyReLU, slope};
  }
  static ActivationKind sigmoid() { return {Activation::Sigmoid}; }
  static ActivationKind tanh() { return {Activation::Tanh}; }

  bool operator==(const ActivationKind& o) const {
    return kind == o.kind && (kind != Activation::LeakyReLU || leaky_slope == o.leaky_slope);
  }

  std::string name() const {
    switch (kind) {
      case Activation::Identity: return "identity";
      case Activation::ReLU: return "relu";
      case Activation::LeakyReLU: return "leaky-relu";
      case Activation::Sigmoid: return "sigmoid";
      case Activation::Tanh: return "tanh";
    }
    return "?";
  }
};

// Expression-level activation functors. The scalar type of the incoming
// expression decides the working precision, so the same kernels serve the
// 32-bit production path and 64-bit test oracles.
struct IdentityFn {
  template <class E>
  auto operator()(const E& z) const {
    return z + typename E::Scalar(0);
  }
  template <class E>
  auto grad(const E& z) const {
    using S = typename E::Scalar;
    return (z * S(0)) + S(1);
  }
};

struct ReluFn {
  template <class E>
  auto operator()(const E& z) const {
    return z.max(typename E::Scalar(0));
  }
  // Subgradient at z == 0 is 0, so z = 0 sits inside the blind range.
  template <class E>
  auto grad(const E& z) const {
    using S = typename E::Scalar;
    return (z > S(0)).template cast<S>();
  }
};

struct LeakyReluFn {
  float slope;
  template <class E>
  auto operator()(const E& z) const {
    using S = typename E::Scalar;
    return z.max(S(0)) + S(slope) * z.min(S(0));
  }
  template <class E>
  auto grad(const E& z) const {
    using S = typename E::Scalar;
    return (z > S(0)).template cast<S>() * (S(1) - S(slope)) + S(slope);
  }
};

struct SigmoidFn {
  template <class E>
  auto operator()(const E& z) const {
    using S = typename E::Scalar;
    return ((-z).exp() + S(1)).inverse();
  }
  template <class E>
  auto grad(const E& z) const {
    using S = typename E::Scalar;
    return ((-z).exp() + S(1)).inverse() * (S(1) - ((-z).exp() + S(1)).inverse());
  }
};

struct TanhFn {
  template <class E>
  auto operator()(const E& z) const {
    return z.tanh();
  }
  template <class E>
  auto grad(const E& z) const {
    using S = typename E::Scalar;
    return S(1) - z.tanh().square();
  }
};

/// Calls fn(functor) with the functor matching `kind`.
template <class F>
decltype(auto) dispatch_activation(ActivationKind kind, F&& fn) {
  switch (kind.kind) {
    case Activation::Identity: return fn(IdentityFn{});
    case Activation::ReLU: return fn(ReluFn{});
    case Activation::LeakyReLU: return fn(LeakyReluFn{kind.leaky_slope});
    case Activation::Sigmoid: return fn(SigmoidFn{});
    case Activation::Tanh: return fn(TanhFn{});
  }
  throw InputError("unknown activation kind");
}

/// Elementwise phi(z); shape preserved.
inline Mat activation_apply(ActivationKind kind, const Mat& z) {
  return dispatch_activation(kind, [&](auto fn) -> Mat { return fn(z.array()).matrix(); });
}

/// Elementwise phi'(z).
inline Mat activation_grad(ActivationKind kind, const Mat& z) {
  return dispatch_activation(kind, [&](auto fn) -> Mat { return fn.grad(z.array()).matrix(); });
}

inline float activation_apply_scalar(ActivationKind kind, float z) {
  Mat m(1, 1);
  m(0, 0) = z;
  return activation_apply(kind, m)(0, 0);
}

/// Input interval where the activation's derivative magnitude is <= tol.
/// Saturating activations (Sigmoid/Tanh) have two symmetric tails; only the
/// left one is materialized and `symmetric_tail` marks the mirrored right one.
struct BlindRange {
  enum class Kind { Empty, LeftUnbounded, Interval };
  Kind kind = Kind::Empty;
  double lower = 0.0;  // Interval only
  double upper = 0.0;  // LeftUnbounded: (-inf, upper]; Interval: [lower, upper]
  bool symmetric_tail = false;

  static BlindRange empty() { return {}; }
  static BlindRange left_unbounded(double upper, bool symmetric = false) {
    return {Kind::LeftUnbounded, 0.0, upper, symmetric};
  }
  static BlindRange interval(double lower, double upper) {
    if (lower > upper) throw InputError("BlindRange: lower > upper");
    return {Kind::Interval, lower, upper, false};
  }

  bool contains(double z) const {
    switch (kind) {
      case Kind::Empty: return false;
      case Kind::LeftUnbounded: return z <= upper;
      case Kind::Interval: return lower <= z && z <= upper;
    }
    return false;
  }

  std::string to_string() const {
    std::ostringstream os;
    switch (kind) {
      case Kind::Empty: os << "empty"; break;
      case Kind::LeftUnbounded: os << "z <= " << upper; break;
      case Kind::Interval: os << "[" << lower << ", " << upper << "]"; break;
    }
    if (symmetric_tail) os << " (plus mirrored right tail z >= " << -upper << ")";
    return os.str();
  }
};

/// Maximal interval with |phi'(z)| <= tol. With tol = 0 only ReLU has a
/// nonempty range (z <= 0, closed at 0 by the subgradient choice above).
inline BlindRange blind_range(ActivationKind kind, double tol) {
  if (tol < 0) throw InputError("blind_range: tol must be >= 0");
  const double inf = std::numeric_limits<double>::infinity();
  switch (kind.kind) {
    case Activation::Identity:
      return tol >= 1.0 ? BlindRange::left_unbounded(inf) : BlindRange::empty();
    case Activation::ReLU:
      return tol >= 1.0 ? BlindRange::left_unbounded(inf) : BlindRange::left_unbounded(0.0);
    case Activation::LeakyReLU: {
      if (tol >= 1.0) return BlindRange::left_unbounded(inf);
      if (tol >= kind.leaky_slope) return BlindRange::left_unbounded(0.0);
      return BlindRange::empty();
    }
    case Activation::Sigmoid: {
      if (tol == 0.0) return BlindRange::empty();
      if (tol >= 0.25) return BlindRange::left_unbounded(inf);
      // sigma(1 - sigma) = tol at sigma = (1 -+ r)/2, r = sqrt(1 - 4 tol);
      // the left-tail crossing is z = ln((1 - r)/(1 + r)).
      const double r = std::sqrt(1.0 - 4.0 * tol);
      return BlindRange::left_unbounded(std::log((1.0 - r) / (1.0 + r)), true);
    }
    case Activation::Tanh: {
      if (tol == 0.0) return BlindRange::empty();
      if (tol >= 1.0) return BlindRange::left_unbounded(inf);
      // 1 - tanh(z)^2 = tol at |z| = atanh(sqrt(1 - tol)).
      return BlindRange::left_unbounded(-std::atanh(std::sqrt(1.0 - tol)), true);
    }
  }
  throw InputError("unknown activation kind");
}

}  // namespace aplab
