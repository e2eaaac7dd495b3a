#pragma once

// Damped Newton on the period system in log coordinates u = log|x|, with a
// central-difference Jacobian and precision doubling when the linear solve
// would eat more than half the working digits.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "periodforge/errors.hpp"
#include "periodforge/families.hpp"
#include "periodforge/numerics.hpp"
#include "periodforge/parallel.hpp"

namespace periodforge {

struct SolveOptions {
  std::optional<PrecReal> targetResidual;  // default 10^-(P0-10)
  int maxIterations = 60;
  int initialPrecision = 30;
  int maxPrecision = 120;
  int dampingLimit = 20;
  std::optional<std::string> pinName;  // default: the family's pin
  std::optional<PrecReal> pinValue;    // default: the seed's value
  QuadratureOptions quadrature;
  std::function<void(const std::string&)> log;  // progress lines, optional
};

struct Solution {
  FamilySpec spec;
  std::vector<std::string> names;
  std::vector<std::string> params;  // decimal strings, variable order
  std::vector<PrecReal> values;     // the same at precisionUsed
  std::optional<std::string> pinnedName;
  std::string pinnedValue;
  PrecReal residualNorm;
  int precisionUsed = 0;
  int iterations = 0;
  std::optional<PrecReal> dependentB;
  std::vector<std::string> residualHistory;
};

struct LinearSolveResult {
  std::vector<PrecReal> x;
  double lostDigits = 0;  // log10 of the 1-norm condition number
};

/// Solves A x = b by LU with partial pivoting and reports the 1-norm
/// condition number from the explicit inverse. Throws NumericError on an
/// exactly singular matrix.
inline LinearSolveResult solveLinear(std::vector<std::vector<PrecReal>> A, std::vector<PrecReal> b, Precision p) {
  const size_t n = b.size();
  std::vector<std::vector<PrecReal>> inv(n, std::vector<PrecReal>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) inv[i][j] = PrecReal(i == j ? 1L : 0L, p);
  PrecReal normA(p);
  for (size_t j = 0; j < n; ++j) {
    PrecReal col(p);
    for (size_t i = 0; i < n; ++i) col += abs(A[i][j]);
    normA = max(normA, col);
  }
  for (size_t k = 0; k < n; ++k) {
    size_t piv = k;
    for (size_t i = k + 1; i < n; ++i)
      if (abs(A[i][k]) > abs(A[piv][k])) piv = i;
    if (A[piv][k].isZero()) throw NumericError("singular Jacobian at column " + std::to_string(k));
    std::swap(A[k], A[piv]);
    std::swap(b[k], b[piv]);
    std::swap(inv[k], inv[piv]);
    for (size_t i = k + 1; i < n; ++i) {
      PrecReal f = A[i][k] / A[k][k];
      if (f.isZero()) continue;
      for (size_t j = k; j < n; ++j) A[i][j] -= f * A[k][j];
      for (size_t j = 0; j < n; ++j) inv[i][j] -= f * inv[k][j];
      b[i] -= f * b[k];
    }
  }
  auto back = [&](std::vector<PrecReal>& v) {
    for (size_t ii = n; ii-- > 0;) {
      for (size_t j = ii + 1; j < n; ++j) v[ii] -= A[ii][j] * v[j];
      v[ii] /= A[ii][ii];
    }
  };
  back(b);
  // columns of inv hold the transformed identity; solve each
  PrecReal normInv(p);
  for (size_t c = 0; c < n; ++c) {
    std::vector<PrecReal> col(n);
    for (size_t i = 0; i < n; ++i) col[i] = inv[i][c];
    back(col);
    PrecReal s(p);
    for (size_t i = 0; i < n; ++i) s += abs(col[i]);
    normInv = max(normInv, s);
  }
  LinearSolveResult r;
  r.x = std::move(b);
  const PrecReal cond = normA * normInv;
  r.lostDigits = cond.isZero() ? 0.0 : std::max(0.0, log10(cond).toDouble());
  return r;
}

namespace detail {

inline std::vector<PrecReal> scaledPoint(const std::vector<PrecReal>& x, const std::vector<int>& freeIdx,
                                         const std::vector<PrecReal>& du, const PrecReal& lambda) {
  std::vector<PrecReal> y = x;
  for (size_t k = 0; k < freeIdx.size(); ++k) y[freeIdx[k]] *= exp(du[k] * lambda);
  return y;
}

inline std::vector<std::string> toStrings(const std::vector<PrecReal>& v, int digits) {
  std::vector<std::string> out;
  for (const auto& x : v) out.push_back(toString(x, digits));
  return out;
}

}  // namespace detail

/// Residual vector of `spec` at `params`; DomainError when params leave the domain.
inline std::vector<PrecReal> evaluateResidual(const FamilySpec& spec, const std::vector<PrecReal>& params, Precision p,
                                              const QuadratureOptions& q = {}) {
  return residualVector(instantiate(spec, params, p), p, q);
}

/// dE_j/du_k for the free variables `freeIdx`, u = log|x|, by central
/// differences with step h (default 10^-(P/3)). A perturbed point outside
/// the domain shrinks h once, then fails naming the column.
inline std::vector<std::vector<PrecReal>> jacobian(const FamilySpec& spec, const std::vector<PrecReal>& params,
                                                   const std::vector<int>& freeIdx, Precision p,
                                                   std::optional<PrecReal> step = std::nullopt,
                                                   const QuadratureOptions& q = {}) {
  const PrecReal h0 = step ? convert(*step, p) : pow10(-(p.digits() / 3), p);
  const size_t nf = freeIdx.size();
  std::vector<std::vector<PrecReal>> cols(nf);
  parallelFor(nf, [&](size_t k) {
    PrecReal h = h0;
    for (int attempt = 0; attempt < 2; ++attempt) {
      std::vector<PrecReal> up = params, down = params;
      up[freeIdx[k]] *= exp(h);
      down[freeIdx[k]] *= exp(-h);
      try {
        auto rp = evaluateResidual(spec, up, p, q);
        auto rm = evaluateResidual(spec, down, p, q);
        for (size_t j = 0; j < rp.size(); ++j) rp[j] = (rp[j] - rm[j]) / (h * 2);
        cols[k] = std::move(rp);
        return;
      } catch (const DomainError&) {
        if (attempt == 1)
          throw NumericError("Jacobian column " + std::to_string(k) + " leaves the domain even with a reduced step");
        h /= 1000L;
      }
    }
  });
  const size_t ne = cols.empty() ? 0 : cols[0].size();
  std::vector<std::vector<PrecReal>> J(ne, std::vector<PrecReal>(nf));
  for (size_t k = 0; k < nf; ++k)
    for (size_t j = 0; j < ne; ++j) J[j][k] = std::move(cols[k][j]);
  return J;
}

namespace detail {

inline std::vector<int> freeIndices(const FamilySpec& spec, const std::optional<std::string>& pin) {
  const auto names = variableNames(spec);
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(names.size()); ++i)
    if (!pin || names[i] != *pin) out.push_back(i);
  return out;
}

}  // namespace detail

/// Newton solve from `seed` (variable order of variableNames(spec)).
inline Solution solvePeriodProblem(const FamilySpec& spec, std::vector<PrecReal> seed, const SolveOptions& opts = {}) {
  if (opts.initialPrecision > opts.maxPrecision) throw ConfigError("initial precision exceeds the maximum precision");
  int P = opts.initialPrecision;
  Precision prec(P);
  const auto names = variableNames(spec);
  const std::optional<std::string> pin = opts.pinName ? opts.pinName : defaultPin(spec);
  if (pin) (void)variableIndex(spec, *pin);
  const std::vector<int> freeIdx = detail::freeIndices(spec, pin);
  if (seed.size() != names.size())
    throw ConfigError("seed has " + std::to_string(seed.size()) + " values, family needs " + std::to_string(names.size()));
  for (auto& v : seed) v = convert(v, prec);
  if (pin && opts.pinValue) seed[variableIndex(spec, *pin)] = convert(*opts.pinValue, prec);

  FamilyInstance inst = instantiate(spec, seed, prec);
  if (inst.system.equations.size() != freeIdx.size())
    throw ConfigError("system is not square after pinning: " + std::to_string(inst.system.equations.size()) +
                      " equations, " + std::to_string(freeIdx.size()) + " free variables");

  const PrecReal target = opts.targetResidual ? convert(*opts.targetResidual, prec)
                                              : pow10(-(opts.initialPrecision - 10), Precision(opts.initialPrecision));
  auto say = [&](const std::string& s) {
    if (opts.log) opts.log(s);
  };

  std::vector<PrecReal> x = seed;
  std::vector<PrecReal> r = residualVector(inst, prec, opts.quadrature);
  PrecReal norm = maxNorm(r, prec);
  std::vector<std::string> history{toString(norm, 6)};
  int it = 0;
  auto escalate = [&]() {
    P = std::min(2 * P, opts.maxPrecision);
    prec = Precision(P);
    for (auto& v : x) v = convert(v, prec);
    try {
      r = evaluateResidual(spec, x, prec, opts.quadrature);
    } catch (const NumericError& e) {
      throw NonConvergenceError(std::string("residual fails at precision ") + std::to_string(P) + ": " + e.what(),
                                detail::toStrings(x, P), history);
    }
    norm = maxNorm(r, prec);
    say("precision -> " + std::to_string(P));
  };

  while (!(norm <= target)) {
    if (it >= opts.maxIterations)
      throw NonConvergenceError("no convergence in " + std::to_string(opts.maxIterations) + " iterations (residual " +
                                    toString(norm, 6) + ")",
                                detail::toStrings(x, P), history);
    ++it;
    std::vector<std::vector<PrecReal>> J;
    LinearSolveResult step;
    try {
      J = jacobian(spec, x, freeIdx, prec, std::nullopt, opts.quadrature);
      std::vector<PrecReal> rhs;
      for (auto& v : r) rhs.push_back(-v);
      step = solveLinear(J, rhs, prec);
    } catch (const NumericError& e) {
      if (P < opts.maxPrecision) {
        escalate();
        continue;
      }
      throw NonConvergenceError(std::string("Newton step failed: ") + e.what(), detail::toStrings(x, P), history);
    }
    if (step.lostDigits > P / 2.0 && P < opts.maxPrecision) {
      say("iteration " + std::to_string(it) + ": Jacobian loses " + std::to_string(step.lostDigits) + " digits");
      escalate();
      continue;
    }
    PrecReal lambda(1L, prec);
    bool accepted = false, anyInDomain = false;
    for (int d = 0; d <= opts.dampingLimit; ++d) {
      std::vector<PrecReal> y = detail::scaledPoint(x, freeIdx, step.x, lambda);
      try {
        auto ry = evaluateResidual(spec, y, prec, opts.quadrature);
        anyInDomain = true;
        PrecReal ny = maxNorm(ry, prec);
        if (ny < norm) {
          x = std::move(y);
          r = std::move(ry);
          norm = std::move(ny);
          accepted = true;
          break;
        }
      } catch (const DomainError&) {
      } catch (const QuadratureError&) {
        // trial point too close to a collision for the quadrature; treat as a bad step
        anyInDomain = true;
      }
      lambda /= 2L;
    }
    history.push_back(toString(norm, 6));
    say("iteration " + std::to_string(it) + ": residual " + toString(norm, 6) + " damping " + toString(lambda, 3) +
        " precision " + std::to_string(P));
    if (!accepted) {
      if (!anyInDomain)
        throw StructuralFailureError("every damped step breaks the ordering chain (iteration " + std::to_string(it) +
                                     ")");
      if (P < opts.maxPrecision) {
        escalate();
        continue;
      }
      throw NonConvergenceError("damping cannot reduce the residual " + toString(norm, 6), detail::toStrings(x, P),
                                history);
    }
  }

  Solution s;
  s.spec = spec;
  s.names = names;
  s.params = detail::toStrings(x, P);
  // the reported residual belongs to the printed digits, not the guard bits
  for (size_t k = 0; k < x.size(); ++k) s.values.emplace_back(std::string_view(s.params[k]), prec);
  s.pinnedName = pin;
  if (pin) s.pinnedValue = s.params[variableIndex(spec, *pin)];
  s.residualNorm = maxNorm(evaluateResidual(spec, s.values, prec, opts.quadrature), prec);
  s.precisionUsed = P;
  s.iterations = it;
  s.residualHistory = history;
  s.dependentB = instantiate(spec, s.values, prec).dependentB;
  return s;
}

struct Branch {
  std::vector<Solution> solutions;
  std::optional<std::string> failure;  // why the branch stopped early
};

/// Solves at each pin value in order, seeding from the previous solution
/// (secant-extrapolated in log coordinates once two are known).
inline Branch continueFamily(const FamilySpec& spec, const std::string& pinName, const std::vector<PrecReal>& schedule,
                             std::vector<PrecReal> seed, SolveOptions opts = {}) {
  if (!isParallel(spec.kind)) throw ConfigError("continuation needs a parallel-end family");
  if (schedule.empty()) throw ConfigError("empty pin schedule");
  for (size_t i = 2; i < schedule.size(); ++i) {
    if ((schedule[i] > schedule[i - 1]) != (schedule[1] > schedule[0]) || schedule[i] == schedule[i - 1])
      throw ConfigError("pin schedule is not monotone");
  }
  const int pinIdx = variableIndex(spec, pinName);
  opts.pinName = pinName;
  Branch br;
  for (size_t i = 0; i < schedule.size(); ++i) {
    const Precision p(opts.initialPrecision);
    std::vector<PrecReal> s = seed;
    if (br.solutions.size() >= 2) {
      const auto& a = br.solutions[br.solutions.size() - 2].values;
      const auto& b = br.solutions.back().values;
      const PrecReal t0 = log(abs(convert(schedule[i - 2], p)));
      const PrecReal t1 = log(abs(convert(schedule[i - 1], p)));
      const PrecReal t2 = log(abs(convert(schedule[i], p)));
      const PrecReal ratio = (t2 - t1) / (t1 - t0);
      for (size_t k = 0; k < s.size(); ++k) {
        PrecReal ua = log(abs(convert(a[k], p))), ub = log(abs(convert(b[k], p)));
        PrecReal mag = exp(ub + (ub - ua) * ratio);
        s[k] = b[k].sign() < 0 ? -mag : mag;
      }
      try {
        checkOrdering(variableLayout(spec), s);
      } catch (const DomainError&) {
        s = br.solutions.back().values;
      }
    } else if (!br.solutions.empty()) {
      s = br.solutions.back().values;
    }
    s[pinIdx] = convert(schedule[i], Precision(std::max(opts.initialPrecision, schedule[i].digits())));
    opts.pinValue = schedule[i];
    try {
      br.solutions.push_back(solvePeriodProblem(spec, s, opts));
    } catch (const Error& e) {
      br.failure = "pin " + pinName + " = " + toString(schedule[i], 12) + ": " + e.what();
      break;
    }
  }
  return br;
}

}  // namespace periodforge
