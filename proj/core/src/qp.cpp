#include "gridgate/qp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <tuple>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace gridgate {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct Scaling {
  Vec col;      // variable scale D
  Vec row;      // constraint scale E
  double cost;  // objective scale
};

// Ruiz-style equilibration of [P A'; A 0] restricted to what we store.
Scaling ruiz_equilibrate(SpMat& p, Vec& q, SpMat& a, Vec& b, int passes) {
  const int n = static_cast<int>(p.rows());
  const int m = static_cast<int>(a.rows());
  Scaling s{Vec::Ones(n), Vec::Ones(m), 1.0};

  for (int pass = 0; pass < passes; ++pass) {
    Vec cnorm = Vec::Zero(n);
    Vec rnorm = Vec::Zero(m);
    for (int j = 0; j < a.outerSize(); ++j)
      for (SpMat::InnerIterator it(a, j); it; ++it) {
        cnorm(j) = std::max(cnorm(j), std::abs(it.value()));
        rnorm(it.row()) = std::max(rnorm(it.row()), std::abs(it.value()));
      }
    for (int j = 0; j < p.outerSize(); ++j)
      for (SpMat::InnerIterator it(p, j); it; ++it)
        cnorm(j) = std::max(cnorm(j), std::abs(it.value()));

    Vec dc(n), dr(m);
    for (int j = 0; j < n; ++j) dc(j) = cnorm(j) > 1e-12 ? 1.0 / std::sqrt(cnorm(j)) : 1.0;
    for (int i = 0; i < m; ++i) dr(i) = rnorm(i) > 1e-12 ? 1.0 / std::sqrt(rnorm(i)) : 1.0;

    a = dr.asDiagonal() * a * dc.asDiagonal();
    p = dc.asDiagonal() * p * dc.asDiagonal();
    q = q.cwiseProduct(dc);
    b = b.cwiseProduct(dr);
    s.col = s.col.cwiseProduct(dc);
    s.row = s.row.cwiseProduct(dr);
  }

  // Normalize the cost after the matrix scaling.
  double pnorm = 0.0;
  for (int j = 0; j < p.outerSize(); ++j)
    for (SpMat::InnerIterator it(p, j); it; ++it) pnorm = std::max(pnorm, std::abs(it.value()));
  const double qn = inf_norm(q);
  const double c = 1.0 / std::max({1.0, pnorm, qn});
  p *= c;
  q *= c;
  s.cost = c;
  return s;
}

double step_to_boundary(const Vec& v, const Vec& dv) {
  double alpha = 1.0;
  for (int i = 0; i < v.size(); ++i)
    if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
  return alpha;
}

}  // namespace

QpResult solve_qp(const QpProblem& prob, const QpOptions& opts) {
  const int n = static_cast<int>(prob.p.rows());
  const int m = static_cast<int>(prob.a.rows());

  QpResult res;
  if (n == 0) {
    res.optimal = true;
    res.message = "empty problem";
    return res;
  }

  SpMat p = prob.p;
  Vec q = prob.q;
  SpMat a = prob.a;
  Vec b = prob.b;
  p.makeCompressed();
  a.makeCompressed();

  Scaling scale{Vec::Ones(n), Vec::Ones(m), 1.0};
  if (opts.equilibrate && m > 0) scale = ruiz_equilibrate(p, q, a, b, 6);

  const SpMat at = SpMat(a.transpose());

  SpMat ident(n, n);
  ident.setIdentity();
  const double reg = 1e-12;

  Eigen::SimplicialLDLT<SpMat> ldlt;
  {
    Vec ones = Vec::Ones(m);
    SpMat pattern = p + at * SpMat(ones.asDiagonal() * a) + ident;
    pattern.makeCompressed();
    ldlt.analyzePattern(pattern);
    ldlt.factorize(pattern);
  }

  // Least-squares starting point: eliminate z from [P A'; A -I][x;z]=[-q;b],
  // then shift the slack pair positive. Dual residuals start near zero, which
  // keeps the first Mehrotra directions sane.
  Vec x = Vec::Zero(n);
  Vec s_slack = Vec::Ones(m);
  Vec z = Vec::Ones(m);
  if (m > 0 && ldlt.info() == Eigen::Success) {
    x = ldlt.solve(at * b - q);
    Vec s_tilde = b - a * x;
    Vec z_tilde = -s_tilde;
    const double sp = s_tilde.minCoeff();
    const double zp = z_tilde.minCoeff();
    s_slack = s_tilde.array() + (sp < 1e-3 ? 1.0 - sp : 0.0);
    z = z_tilde.array() + (zp < 1e-3 ? 1.0 - zp : 0.0);
  } else if (ldlt.info() != Eigen::Success) {
    res.message = "initial factorization failed";
    return res;
  }

  const double bn = 1.0 + inf_norm(b);
  const double qn = 1.0 + inf_norm(q);

  auto scaled_obj = [&](const Vec& xv) { return 0.5 * xv.dot(p * xv) + q.dot(xv); };

  int iter = 0;
  std::string stop_message = "iteration limit";
  bool converged = false;
  const bool trace = std::getenv("GRIDGATE_QP_TRACE") != nullptr;

  for (iter = 0; iter < opts.max_iterations; ++iter) {
    const Vec rd = p * x + q + at * z;
    const Vec rp = a * x + s_slack - b;
    const double mu = m > 0 ? s_slack.dot(z) / m : 0.0;
    const double obj_scale = 1.0 + std::abs(scaled_obj(x));
    if (trace)
      std::fprintf(stderr, "qp iter %3d: rp=%.3e rd=%.3e mu=%.3e obj=%.6e\n", iter,
                   inf_norm(rp) / bn, inf_norm(rd) / qn, mu / obj_scale, scaled_obj(x));

    if (inf_norm(rp) / bn < opts.tolerance && inf_norm(rd) / qn < opts.tolerance &&
        mu / obj_scale < opts.tolerance) {
      converged = true;
      stop_message = "optimal";
      break;
    }

    // Normal matrix P + A' diag(z/s) A (+ tiny static regularization).
    Vec d = z.cwiseQuotient(s_slack);
    for (int i = 0; i < m; ++i) d(i) = std::clamp(d(i), 1e-12, 1e14);
    SpMat normal = p + at * SpMat(d.asDiagonal() * a) + SpMat(reg * ident);
    normal.makeCompressed();
    ldlt.factorize(normal);
    if (ldlt.info() != Eigen::Success) {
      stop_message = "factorization failed";
      break;
    }

    auto solve_kkt = [&](const Vec& rc) {
      // rc is the complementarity target: S z dz + Z ds = -rc
      const Vec tmp = z.cwiseProduct(rp) - rc;  // = Z rp - rc
      const Vec rhs = -(rd + at * (tmp.cwiseQuotient(s_slack)));
      Vec dx = ldlt.solve(rhs);
      if (trace) {
        const double err = inf_norm(normal * dx - rhs);
        std::fprintf(stderr, "    solve err=%.3e |rhs|=%.3e |dx|=%.3e\n", err, inf_norm(rhs),
                     inf_norm(dx));
      }
      Vec dz = (z.cwiseProduct(a * dx + rp) - rc).cwiseQuotient(s_slack);
      Vec ds = -rp - a * dx;
      return std::tuple<Vec, Vec, Vec>(std::move(dx), std::move(dz), std::move(ds));
    };

    // Predictor (affine scaling direction).
    auto [dx_aff, dz_aff, ds_aff] = solve_kkt(s_slack.cwiseProduct(z));
    const double a_pri = step_to_boundary(s_slack, ds_aff);
    const double a_dua = step_to_boundary(z, dz_aff);
    const double a_aff = std::min(a_pri, a_dua);
    const double mu_aff =
        m > 0 ? (s_slack + a_aff * ds_aff).dot(z + a_aff * dz_aff) / m : 0.0;
    const double sigma = mu > 0 ? std::pow(mu_aff / mu, 3.0) : 0.0;

    // Corrector.
    const Vec rc = s_slack.cwiseProduct(z) + ds_aff.cwiseProduct(dz_aff) -
                   Vec::Constant(m, sigma * mu);
    auto [dx, dz, ds] = solve_kkt(rc);

    const double alpha =
        0.995 * std::min({step_to_boundary(s_slack, ds), step_to_boundary(z, dz), 1.0 / 0.995});
    if (!(alpha > 1e-14) || !dx.allFinite()) {
      stop_message = "step collapsed";
      break;
    }
    x += alpha * dx;
    s_slack += alpha * ds;
    z += alpha * dz;
  }

  // Certification happens on the original (unscaled) data.
  auto certify = [&](const Vec& xu, const Vec& zu, double out[4]) {
    const double obj = 0.5 * xu.dot(prob.p * xu) + prob.q.dot(xu);
    double primal = 0.0, comp = 0.0;
    if (m > 0) {
      const Vec slack = prob.b - prob.a * xu;
      primal = inf_norm((-slack).cwiseMax(0.0)) / (1.0 + inf_norm(prob.b));
      comp = std::abs(slack.cwiseMax(0.0).dot(zu)) / m / (1.0 + std::abs(obj));
    }
    Vec grad = prob.p * xu + prob.q;
    if (m > 0) grad += prob.a.transpose() * zu;
    const double dual =
        inf_norm(grad) / (1.0 + std::max(inf_norm(prob.q), inf_norm(prob.p * xu)));
    out[0] = primal;
    out[1] = dual;
    out[2] = comp;
    out[3] = std::max({primal, dual, comp});
    return obj;
  };

  Vec x_best = x.cwiseProduct(scale.col);
  Vec z_best = m > 0 ? Vec(z.cwiseProduct(scale.row) / scale.cost) : Vec(0);
  double cert[4];
  certify(x_best, z_best, cert);
  bool polished = false;

  // Active-set polish: solve the equality-constrained KKT system on the rows
  // the interior point identifies as active, keep the result only when it
  // certifies at least as well.
  if (converged && opts.polish && m > 0) {
    std::vector<int> active;
    for (int i = 0; i < m; ++i)
      if (z(i) > s_slack(i)) active.push_back(i);
    const int ma = static_cast<int>(active.size());
    if (ma > 0) {
      const double delta = 1e-11;
      std::vector<Eigen::Triplet<double>> trips;
      for (int j = 0; j < p.outerSize(); ++j)
        for (SpMat::InnerIterator it(p, j); it; ++it)
          trips.emplace_back(static_cast<int>(it.row()), j, it.value());
      for (int j = 0; j < n; ++j) trips.emplace_back(j, j, delta);
      for (int k = 0; k < ma; ++k) {
        const int row = active[k];
        for (SpMat::InnerIterator it(at, row); it; ++it)
          trips.emplace_back(static_cast<int>(it.row()), n + k, it.value());
        for (SpMat::InnerIterator it(at, row); it; ++it)
          trips.emplace_back(n + k, static_cast<int>(it.row()), it.value());
        trips.emplace_back(n + k, n + k, -delta);
      }
      SpMat kkt(n + ma, n + ma);
      kkt.setFromTriplets(trips.begin(), trips.end());
      kkt.makeCompressed();
      Eigen::SparseLU<SpMat> lu;
      lu.compute(kkt);
      if (lu.info() == Eigen::Success) {
        Vec rhs(n + ma);
        rhs.head(n) = -q;
        for (int k = 0; k < ma; ++k) rhs(n + k) = b(active[k]);
        Vec sol = lu.solve(rhs);
        // One round of iterative refinement.
        Vec resid = rhs - kkt * sol;
        sol += lu.solve(resid);
        if (sol.allFinite()) {
          Vec xp = sol.head(n);
          Vec zp = Vec::Zero(m);
          for (int k = 0; k < ma; ++k) zp(active[k]) = std::max(0.0, sol(n + k));
          Vec xp_u = xp.cwiseProduct(scale.col);
          Vec zp_u = zp.cwiseProduct(scale.row) / scale.cost;
          double cert_p[4];
          certify(xp_u, zp_u, cert_p);
          if (cert_p[3] <= cert[3]) {
            x_best = std::move(xp_u);
            z_best = std::move(zp_u);
            std::copy(cert_p, cert_p + 4, cert);
            polished = true;
          }
        }
      }
    }
  }

  res.x = std::move(x_best);
  res.z = std::move(z_best);
  res.iterations = iter;
  res.objective = 0.5 * res.x.dot(prob.p * res.x) + prob.q.dot(res.x);
  res.primal_residual = cert[0];
  res.dual_residual = cert[1];
  res.comp_residual = cert[2];
  res.kkt_residual = cert[3];
  res.optimal = converged;
  res.polished = polished;
  res.message = stop_message;
  return res;
}

}  // namespace gridgate
