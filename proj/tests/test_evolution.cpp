#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "thermoevo/evolution.hpp"

using namespace thermoevo;

namespace {

EvolutionProblem pulse_problem(ModelFamily f, Index n, double dt, Scheme scheme, double t_max = 3.0, double center = 1.0,
                               double width = 0.2) {
  const Grid1D g(1.0, n);
  const auto law = assemble_material_law(catalog_example(f, n));
  std::vector<ForcingTerm> forcing{{Block::Theta, bump_profile(g, 0.5, 0.25), gaussian_pulse(center, width)},
                                   {Block::V, mode_profile(g, 1), gaussian_pulse(center, width)}};
  return make_problem(law, g, std::move(forcing), t_max, dt, 1.0, scheme);
}

/// <M0 U, U> written out from the congruence structure.
double quadratic_form(const DiscreteSystem& s, const Eigen::VectorXd& u) {
  const auto& lay = s.layout;
  const Index nn = lay.n_nodes, nf = lay.n_faces;
  double e = 0.0;
  for (Index j = 0; j < nn; ++j) {
    e += s.rho_node(j) * u(lay.v() + j) * u(lay.v() + j);
    e += s.nu_node(j) * u(lay.theta() + j) * u(lay.theta() + j);
  }
  for (Index i = 0; i < nf; ++i) {
    const double left = i >= 1 ? u(lay.theta() + i - 1) : 0.0;
    const double right = i < nn ? u(lay.theta() + i) : 0.0;
    const double pt = 0.5 * (left + right);
    const double sg = u(lay.sigma() + i) + s.gamma_face(i) * pt;
    const double qq = u(lay.q() + i) + s.zeta_face(i) * pt;
    e += s.c_inv_face(i) * sg * sg + s.a0_face(i) * qq * qq;
  }
  return e;
}

}  // namespace

TEST(Forcing, Profiles) {
  const auto g = gaussian_pulse(1.0, 0.1);
  EXPECT_DOUBLE_EQ(g(1.0), 1.0);
  EXPECT_EQ(g(0.2 - 1e-12), 0.0);
  EXPECT_GT(g(0.2 + 1e-3), 0.0);
  const auto s = delayed_step(1.0, 0.5);
  EXPECT_EQ(s(1.0), 0.0);
  EXPECT_EQ(s(1.5), 1.0);
  EXPECT_NEAR(s(1.25), 0.5, 1e-15);
  const Grid1D grid(1.0, 8);
  EXPECT_NEAR(bump_profile(grid, 0.5, 0.25)(3), 1.0, 1e-15);
  EXPECT_EQ(bump_profile(grid, 0.5, 0.25)(0), 0.0);
  EXPECT_THROW(mode_profile(grid, 0), InvalidInput);
}

TEST(Discretize, M0MatchesCongruenceForm) {
  std::mt19937 rng(3);
  std::normal_distribution<double> nd;
  for (auto f : catalog_families) {
    const auto sys = discretize(assemble_material_law(catalog_example(f, 12)), Grid1D(1.0, 12));
    const Eigen::MatrixXd m(sys.m0);
    EXPECT_EQ((m - m.transpose()).cwiseAbs().maxCoeff(), 0.0) << to_string(f);
    for (int k = 0; k < 5; ++k) {
      const Eigen::VectorXd u = Eigen::VectorXd::NullaryExpr(sys.n_unknowns(), [&] { return nd(rng); });
      const double e = quadratic_form(sys, u);
      EXPECT_NEAR(u.dot(sys.m0 * u), e, 1e-12 * std::abs(e)) << to_string(f);
    }
  }
}

TEST(Discretize, RealizationStates) {
  const Index n = 10;
  const Grid1D g(1.0, n);
  // Lord-Shulman: constant a2, no states
  EXPECT_EQ(discretize(assemble_material_law(catalog_example(ModelFamily::LordShulman, n)), g).n_aux(), 0);
  // Green-Lindsay: one a1 pole per vertex
  const auto gl = discretize(assemble_material_law(catalog_example(ModelFamily::GreenLindsay, n)), g);
  EXPECT_EQ(gl.n_aux(), n - 1);
  EXPECT_NEAR(gl.lambda(0), -1.0, 1e-12);
  // DPL-I: one a2 pole per midpoint
  EXPECT_EQ(discretize(assemble_material_law(catalog_example(ModelFamily::DPL_I, n)), g).n_aux(), n);
  EXPECT_THROW(discretize(assemble_material_law(catalog_example(ModelFamily::DPL_I, 4)), g), InvalidInput);
}

TEST(Discretize, VertexAveragesOfCellwiseLaw) {
  ModelSpec s = catalog_example(ModelFamily::GreenLindsay, 3);
  s.coefficients["rho0"] = {1.0, 3.0, 5.0};
  s.coefficients["d"] = {2.0, 2.0, 4.0};
  const auto sys = discretize(assemble_material_law(s), Grid1D(1.0, 3));
  EXPECT_DOUBLE_EQ(sys.rho_node(0), 2.0);
  EXPECT_DOUBLE_EQ(sys.rho_node(1), 4.0);
  EXPECT_FALSE(sys.spatially_constant);
  // vertex 0 has equal neighbours (one state), vertex 1 different ones (two states)
  EXPECT_EQ(sys.n_aux(), 3);
}

TEST(Solve, ZeroForcingGivesZero) {
  auto p = pulse_problem(ModelFamily::Classical, 8, 1.0 / 64.0, Scheme::BackwardEuler);
  p.forcing.clear();
  EXPECT_EQ(solve(p).u.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Solve, Linearity) {
  for (auto scheme : {Scheme::BackwardEuler, Scheme::Trapezoidal}) {
    auto p = pulse_problem(ModelFamily::DPL_I, 12, 1.0 / 64.0, scheme);
    auto p1 = p, p2 = p;
    p1.forcing.resize(1);
    p2.forcing.erase(p2.forcing.begin());
    const Eigen::MatrixXd sum = solve(p1).u + solve(p2).u;
    const Eigen::MatrixXd full = solve(p).u;
    EXPECT_LE((sum - full).cwiseAbs().maxCoeff(), 1e-12 * full.cwiseAbs().maxCoeff());
  }
}

TEST(Solve, SingularStepMatrixReported) {
  ModelSpec s = catalog_example(ModelFamily::Custom, 6);
  s.set("a0", 0.0);
  s.custom_a1 = RationalMatrixFunction::zero(1, 1);
  s.custom_a2 = RationalMatrixFunction::zero(1, 1);
  const Grid1D g(1.0, 6);
  const auto p = make_problem(assemble_material_law(s), g, {}, 1.0, 0.125, 1.0, Scheme::BackwardEuler);
  try {
    solve(p);
    FAIL() << "expected SingularSystem";
  } catch (const SingularSystem& e) {
    EXPECT_NE(std::string(e.what()).find("dt = 0.125"), std::string::npos);
  }
}

TEST(Energy, ConservedByTrapezoidWithoutDissipation) {
  // Green-Naghdi II has M1 = 0: the trapezoidal rule preserves <M0 U, U> once F = 0
  const auto p = pulse_problem(ModelFamily::GreenNaghdiII, 32, 1.0 / 128.0, Scheme::Trapezoidal);
  const auto tr = solve(p);
  const Eigen::VectorXd e = energy_functional(tr, p.system);
  const Index off = static_cast<Index>(std::ceil(2.7 / p.dt));
  for (Index n = off; n < e.size(); ++n) EXPECT_NEAR(e(n), e(off), 1e-12 * e(off));
}

TEST(Energy, NonincreasingAfterForcing) {
  for (auto f : catalog_families) {
    for (auto scheme : {Scheme::BackwardEuler, Scheme::Trapezoidal}) {
      const auto p = pulse_problem(f, 32, 1.0 / 128.0, scheme);
      const auto tr = solve(p);
      EXPECT_EQ(first_energy_increase(energy_functional(tr, p.system), tr, 2.7), -1) << to_string(f) << ' ' << to_string(scheme);
    }
  }
}

TEST(DerivedFields, StressRelationHoldsExactly) {
  for (auto scheme : {Scheme::BackwardEuler, Scheme::Trapezoidal}) {
    const auto p = pulse_problem(ModelFamily::LordShulman, 16, 1.0 / 64.0, scheme);
    const auto tr = solve(p);
    const Eigen::MatrixXd eps = strain(tr, p.system).samples();
    const Eigen::MatrixXd sigma = tr.block(1).samples();
    const Eigen::MatrixXd theta = tr.block(2).samples();
    const Eigen::MatrixXd p_avg(p.system.p_avg);
    const Eigen::MatrixXd rebuilt =
        (eps * p.system.c_face.asDiagonal()) - (theta * p_avg.transpose()) * p.system.gamma_face.asDiagonal();
    EXPECT_LE((rebuilt - sigma).cwiseAbs().maxCoeff(), 1e-11 * sigma.cwiseAbs().maxCoeff()) << to_string(scheme);
  }
}

TEST(DerivedFields, EntropyBalance) {
  // rho0 (eta^n - eta^{n-1}) = dt (h - D_div q) at every vertex, with the scheme's time average
  for (auto f : {ModelFamily::GreenLindsay, ModelFamily::DPL_II, ModelFamily::LordShulman}) {
    for (auto scheme : {Scheme::BackwardEuler, Scheme::Trapezoidal}) {
      const auto p = pulse_problem(f, 16, 1.0 / 64.0, scheme);
      const auto tr = solve(p);
      const Eigen::MatrixXd eta = compute_entropy(tr, p.system).samples() * p.system.rho_node.asDiagonal();
      const Eigen::MatrixXd q = tr.block(3).samples();
      const Eigen::MatrixXd dgrad(p.system.ops.d_grad);
      double worst = 0.0;
      for (Index n = 1; n <= tr.steps(); ++n) {
        const auto h_at = [&](Index k) {
          return Eigen::VectorXd(p.forcing_at(p.time(k)).segment(p.system.layout.theta(), p.system.layout.n_nodes));
        };
        const auto flux = [&](Index k) { return Eigen::VectorXd(h_at(k) + dgrad.transpose() * q.row(k).transpose()); };
        const Eigen::VectorXd rate = scheme == Scheme::BackwardEuler ? flux(n) : Eigen::VectorXd(0.5 * (flux(n) + flux(n - 1)));
        worst = std::max(worst, (eta.row(n).transpose() - eta.row(n - 1).transpose() - p.dt * rate).cwiseAbs().maxCoeff());
      }
      EXPECT_LE(worst, 1e-11 * eta.cwiseAbs().maxCoeff()) << to_string(f) << ' ' << to_string(scheme);
    }
  }
}

TEST(DerivedFields, TemperatureRecoveryForGreenLindsay) {
  const auto p = pulse_problem(ModelFamily::GreenLindsay, 8, 1.0 / 256.0, Scheme::Trapezoidal);
  const auto tr = solve(p);
  const Eigen::MatrixXd theta = temperature(tr, p.system).samples();
  const Eigen::MatrixXd big = tr.block(2).samples();
  // Theta = theta + n0 theta' with a centred difference, n0 = 1
  double worst = 0.0;
  for (Index n = 1; n + 1 <= tr.steps(); ++n)
    worst = std::max(worst, (theta.row(n) + (theta.row(n + 1) - theta.row(n - 1)) / (2.0 * p.dt) - big.row(n)).cwiseAbs().maxCoeff());
  EXPECT_LE(worst, 1e-3 * big.cwiseAbs().maxCoeff());
}

TEST(Convergence, TemporalOrders) {
  for (auto scheme : {Scheme::BackwardEuler, Scheme::Trapezoidal}) {
    const auto ref = solve(pulse_problem(ModelFamily::DPL_I, 16, 1.0 / 4096.0, scheme, 2.0));
    std::vector<double> errs;
    for (double dt : {1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0}) {
      const auto tr = solve(pulse_problem(ModelFamily::DPL_I, 16, dt, scheme, 2.0));
      const Index stride = static_cast<Index>(std::lround(dt * 4096.0));
      double e = 0.0;
      for (Index n = 0; n <= tr.steps(); ++n) e = std::max(e, (tr.u.row(n) - ref.u.row(n * stride)).cwiseAbs().maxCoeff());
      errs.push_back(e);
    }
    const double order = std::log2(errs[1] / errs[2]);
    if (scheme == Scheme::BackwardEuler) {
      EXPECT_NEAR(order, 1.0, 0.15);
    } else {
      EXPECT_NEAR(order, 2.0, 0.2);
    }
  }
}

TEST(Causality, MarchingSolverHasNoLeakage) {
  const auto p = pulse_problem(ModelFamily::DPL_I, 16, 1.0 / 128.0, Scheme::BackwardEuler, 4.0, 2.5, 0.1);
  const auto r = causality_test(p, 2.5 - 0.8);
  EXPECT_FALSE(r.skipped);
  EXPECT_EQ(r.leakage, 0.0);
  const auto touching = pulse_problem(ModelFamily::DPL_I, 16, 1.0 / 128.0, Scheme::BackwardEuler, 4.0, 0.5, 0.1);
  EXPECT_TRUE(causality_test(touching, 0.0).skipped);
}

TEST(Causality, FluxLawSymbol) {
  const auto law = assemble_material_law(catalog_example(ModelFamily::LordShulman));
  // -kappa z / (kappa a0 + z) with kappa = a0 = 1
  const auto s = flux_law_symbol(law.cells[0]);
  for (cplx z : {cplx(0.3, 0.1), cplx(2.0, -1.0)}) EXPECT_NEAR(std::abs(eval_rational(s, z)(0, 0) + z / (1.0 + z)), 0.0, 1e-14);
  const auto in = WeightedSignal::sample_scalar(0.0, 10.0, 1.0 / 512.0, 1.0, gaussian_pulse(4.0, 0.2));
  const auto r = laplace_causality_test(law.cells[0], in, 4.0 - 1.6);
  EXPECT_FALSE(r.skipped);
  EXPECT_LE(r.leakage, 1e-6);
}

TEST(SolutionBound, CatalogExamples) {
  for (auto f : catalog_families) {
    const auto law = assemble_material_law(catalog_example(f, 16));
    const auto rep = check_theorem_2(law);
    ASSERT_EQ(rep.verdict, Verdict::Satisfied);
    const double rho = std::max(1.0, rep.rho_certified);
    const Grid1D g(1.0, 16);
    std::vector<ForcingTerm> forcing{{Block::Theta, bump_profile(g, 0.5, 0.25), gaussian_pulse(1.0, 0.2)}};
    const auto p = make_problem(law, g, forcing, 1.0 + 16.0 / rho, 1.0 / 128.0, rho, Scheme::BackwardEuler);
    const auto b = solution_bound_check(p, rep);
    EXPECT_TRUE(b.holds()) << to_string(f) << ' ' << b.lhs << ' ' << b.rhs;
  }
}

TEST(SolutionBound, ShortWindowRejected) {
  const auto law = assemble_material_law(catalog_example(ModelFamily::GreenNaghdiII, 16));
  const auto rep = check_theorem_2(law);
  const Grid1D g(1.0, 16);
  std::vector<ForcingTerm> forcing{{Block::Theta, bump_profile(g, 0.5, 0.25), gaussian_pulse(1.0, 0.2)}};
  const auto p = make_problem(law, g, forcing, 3.0, 1.0 / 64.0, std::max(1.0, rep.rho_certified), Scheme::BackwardEuler);
  EXPECT_THROW(solution_bound_check(p, rep), WindowTooShort);
}
