#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "carnot/convergence.hpp"
#include "carnot/errors.hpp"
#include "carnot/quantize.hpp"
#include "oracles.hpp"

using namespace carnot;

namespace {

Group& heis() {
  static Group g(builtin_algebra("heisenberg"));
  return g;
}

Group& flat3() {
  static Group g(builtin_algebra("abelian(3)"));
  return g;
}

double integrate(const GridFunction& f) {
  const QuadNodes q = make_nodes(f.spec);
  double s = 0.0;
  for (long k = 0; k < q.count(); ++k) s += q.wts[static_cast<size_t>(k)] * f.values[static_cast<size_t>(k)];
  return s;
}

// gaussian mass of the "default" preset profile, a = 2
const double kMass = std::pow(std::acos(-1.0) / 2.0, 1.5);

double smooth_f(const double* y) {
  const double r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
  return std::exp(-0.5 * r2) * std::cos(y[0] - 0.5 * y[1]);
}

} // namespace

TEST_SUITE("quantize") {

TEST_CASE("bump and smoothstep") {
  CHECK(smoothstep_c(-1.0) == 0.0);
  CHECK(smoothstep_c(0.0) == 0.0);
  CHECK(smoothstep_c(1.0) == 1.0);
  CHECK(smoothstep_c(2.0) == 1.0);
  CHECK(smoothstep_c(0.5) == doctest::Approx(0.5));
  for (int i = 1; i < 20; ++i)
    CHECK(smoothstep_c(i / 20.0) > smoothstep_c((i - 1) / 20.0));

  CHECK(bump_c(0.0) == 1.0);
  CHECK(bump_c(1.0) == 0.0);
  CHECK(bump_c(-1.0) == 0.0);
  CHECK(bump_c(3.0) == 0.0);
  CHECK(bump_c(0.4) == bump_c(-0.4));
  CHECK(bump_c(0.49, 0.5) == 1.0);
  CHECK(bump_c(0.75, 0.5) > 0.0);
  CHECK(bump_c(0.75, 0.5) < 1.0);
}

TEST_CASE("tensor grid nodes and weights") {
  const GridSpec spec = GridSpec::tensor(Box::cube(2, 1.0), 3);
  CHECK(spec.node_count() == 9);
  const QuadNodes q = make_nodes(spec);
  REQUIRE(q.count() == 9);

  // last axis fastest
  CHECK(q.point(0)[0] == -1.0);
  CHECK(q.point(0)[1] == -1.0);
  CHECK(q.point(1)[0] == -1.0);
  CHECK(q.point(1)[1] == 0.0);
  CHECK(q.point(3)[0] == 0.0);
  CHECK(q.point(3)[1] == -1.0);

  double vol = 0.0;
  for (long k = 0; k < q.count(); ++k) vol += q.wts[static_cast<size_t>(k)];
  CHECK(vol == doctest::Approx(4.0));
  CHECK(q.wts[0] == doctest::Approx(0.25)); // corner
  CHECK(q.wts[4] == doctest::Approx(1.0));  // center

  // trapezoid is exact on per-axis linear integrands
  double lin = 0.0;
  for (long k = 0; k < q.count(); ++k)
    lin += q.wts[static_cast<size_t>(k)] * (2.0 * q.point(k)[0] + 3.0 * q.point(k)[1] + 1.0);
  CHECK(lin == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("grid spec validation") {
  GridSpec bad = GridSpec::tensor(Box::cube(2, 1.0), 1);
  CHECK_THROWS_AS(make_nodes(bad), ConfigError);

  GridSpec mism = GridSpec::tensor(Box::cube(2, 1.0), 4);
  mism.res.push_back(4);
  CHECK_THROWS_AS(make_nodes(mism), ConfigError);

  Box empty;
  empty.lo = {0.0, 0.0};
  empty.hi = {1.0, 0.0};
  CHECK_THROWS_AS(make_nodes(GridSpec::tensor(empty, 4)), ConfigError);

  GridSpec q = GridSpec::qmc(Box::cube(2, 1.0), 0, 1);
  CHECK_THROWS_AS(make_nodes(q), ConfigError);
}

TEST_CASE("halton nodes") {
  const Box box = Box::cube(2, 1.0);
  const GridSpec spec = GridSpec::qmc(box, 4000, 42);
  const QuadNodes q = make_nodes(spec);
  REQUIRE(q.count() == 4000);
  double vol = 0.0;
  for (long k = 0; k < q.count(); ++k) {
    CHECK(box.contains(q.point(k)));
    vol += q.wts[static_cast<size_t>(k)];
  }
  CHECK(vol == doctest::Approx(4.0));

  const QuadNodes q2 = make_nodes(spec);
  CHECK(q.pts == q2.pts); // same seed, same points

  GridSpec other = spec;
  other.seed = 43;
  CHECK(make_nodes(other).pts != q.pts);

  // integrates a smooth function to low-discrepancy accuracy
  auto f = [](const double* y) { return std::exp(-(y[0] * y[0] + y[1] * y[1])); };
  double qmc = 0.0;
  for (long k = 0; k < q.count(); ++k) qmc += q.wts[static_cast<size_t>(k)] * f(q.point(k));
  const GridFunction dense = sample_grid(GridSpec::tensor(box, 201), f);
  CHECK(qmc == doctest::Approx(integrate(dense)).epsilon(5e-3));
}

TEST_CASE("grid function csv round trip") {
  const GridSpec spec = GridSpec::tensor(Box::cube(2, 1.0), 3);
  const GridFunction f =
      sample_grid(spec, [](const double* y) { return y[0] + 10.0 * y[1] + 0.123456789012345; });
  const std::string csv = f.to_csv();
  CHECK(csv.rfind("i1,i2,value\n0,0,", 0) == 0);
  CHECK(csv.find("\n# grid res=3,3 lo=-1,-1 hi=1,1\n") != std::string::npos);

  std::istringstream in(csv);
  const GridFunction g = read_grid_csv(in);
  CHECK(g.spec == f.spec);
  CHECK(g.values == f.values); // 17 significant digits round-trip exactly
}

TEST_CASE("grid csv format errors") {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return read_grid_csv(in);
  };
  CHECK_THROWS_AS(parse(""), FormatError);
  CHECK_THROWS_AS(parse("value\n1\n"), FormatError);
  CHECK_THROWS_AS(parse("i1,i2,value\n0,0\n"), FormatError);
  CHECK_THROWS_AS(parse("i1,value\n0,x\n# grid res=2 lo=0 hi=1\n"), FormatError);
  CHECK_THROWS_AS(parse("i1,value\n0,1\n1,2\n"), FormatError); // no summary
  CHECK_THROWS_AS(parse("i1,value\n0,1\n# grid res=3 lo=0 hi=1\n"), FormatError);
  CHECK_THROWS_AS(parse("i1,value\n0,1\n5,2\n# grid res=2 lo=0 hi=1\n"), FormatError);
  // well-formed minimal case for contrast
  const GridFunction ok = parse("i1,value\n0,1\n1,2\n# grid res=2 lo=0 hi=1\n");
  CHECK(ok.values == std::vector<double>{1.0, 2.0});
}

TEST_CASE("grid function binary round trip") {
  const GridSpec spec = GridSpec::tensor(Box::cube(3, 2.0), 4);
  GridFunction f = sample_grid(spec, [](const double* y) { return std::sin(y[0] * y[1] + y[2]); });
  std::stringstream buf;
  write_grid_binary(f, buf);
  const GridFunction g = read_grid_binary(buf);
  CHECK(g.spec == f.spec);
  CHECK(g.values == f.values);

  // halton-backed values round-trip through the binary format too
  GridFunction h;
  h.spec = GridSpec::qmc(Box::cube(2, 1.0), 11, 7);
  h.values.assign(11, 0.5);
  CHECK_THROWS_AS(h.to_csv(), DomainError);
  std::stringstream buf2;
  write_grid_binary(h, buf2);
  CHECK(read_grid_binary(buf2).spec == h.spec);

  std::stringstream bad("XXXX nothing here");
  CHECK_THROWS_AS(read_grid_binary(bad), FormatError);
  std::string bytes = buf.str();
  std::stringstream cut(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(read_grid_binary(cut), FormatError);
}

TEST_CASE("bump gauss kernel invariants") {
  const Box sup = Box::centered({1.6, 2.4, 1.8});
  const Kernel k = kernel_preset(heis(), "default", sup);
  CHECK(k.separable());
  CHECK(k.eval({0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}) == 1.0); // plateau center, P = 1
  CHECK(k.eval({1.7, 0.0, 0.0}, {0.0, 0.0, 0.0}) == 0.0); // outside x_support
  CHECK(k.eval({5.0, 5.0, 5.0}, {0.1, 0.1, 0.1}) == 0.0);

  // sampled envelope bound for both presets
  const Kernel ko = kernel_preset(heis(), "odd", sup);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> z{U(rng), U(rng), U(rng)};
    const double r = std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
    for (const Kernel* kk : {&k, &ko}) {
      const double env = kk->env_amp * std::pow(1.0 + r, kk->env_deg) * std::exp(-kk->env_a * r * r);
      CHECK(std::abs(kk->z_part(z.data())) <= env + 1e-12);
    }
  }
  // fast decay: the profile at radius 2 already dominates radius 3, 4
  const std::vector<double> z2{2.0, 0.0, 0.0}, z3{3.0, 0.0, 0.0}, z4{4.0, 0.0, 0.0};
  CHECK(std::abs(k.z_part(z3.data())) < std::abs(k.z_part(z2.data())) / 100.0);
  CHECK(std::abs(k.z_part(z4.data())) < std::abs(k.z_part(z3.data())) / 100.0);

  CHECK_THROWS_AS(make_bump_gauss_kernel(heis(), sup, 0.0, {}, 1.0), ConfigError);
  CHECK_THROWS_AS(make_bump_gauss_kernel(heis(), sup, 1.0, {1.0, 2.0}, 1.0), ConfigError);
  CHECK_THROWS_AS(make_bump_gauss_kernel(heis(), sup, 1.0, {}, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(make_bump_gauss_kernel(heis(), Box::cube(2, 1.0), 1.0, {}, 1.0), ConfigError);
  CHECK_THROWS_AS(kernel_preset(heis(), "nope", sup), ConfigError);
}

TEST_CASE("kernel tail radius against the closed-form gaussian tail") {
  const Kernel k = kernel_preset(heis(), "default", Box::cube(3, 2.0));
  const double a = 2.0;
  // integral of r^2 exp(-a r^2) from R: R exp(-a R^2)/(2a) + sqrt(pi) erfc(sqrt(a) R)/(4 a^{3/2})
  auto tail = [a](double R) {
    return R * std::exp(-a * R * R) / (2.0 * a) +
           std::sqrt(std::acos(-1.0)) * std::erfc(std::sqrt(a) * R) / (4.0 * std::pow(a, 1.5));
  };
  for (double tol : {1e-8, 1e-12}) {
    double lo = 0.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (tail(mid) > tol * tail(0.0) ? lo : hi) = mid;
    }
    CHECK(kernel_tail_radius(k, tol) == doctest::Approx(0.5 * (lo + hi)).epsilon(5e-3));
  }
  CHECK(kernel_tail_radius(k, 1e-12) > kernel_tail_radius(k, 1e-8));
  CHECK(kernel_tail_radius(k, 1e-8) > kernel_tail_radius(k, 1e-4));
  CHECK_THROWS_AS(kernel_tail_radius(k, 0.0), ConfigError);
  CHECK_THROWS_AS(kernel_tail_radius(k, 1.0), ConfigError);

  const GridSpec z = default_z_grid(k, 33);
  CHECK(z.res == std::vector<int>{33, 33, 33});
  CHECK(z.box.hi[0] == doctest::Approx(kernel_tail_radius(k, 1e-12)));
}

TEST_CASE("rescale kernel") {
  const Kernel k = kernel_preset(heis(), "default", Box::cube(3, 2.0));
  const std::vector<double> x{0.2, -0.3, 0.4}, z{0.3, 0.1, -0.2};
  CHECK_THROWS_AS(rescale_kernel(k, 0.0, x, z), DomainError);
  CHECK_THROWS_AS(rescale_kernel(k, -0.5, x, z), DomainError);
  CHECK(rescale_kernel(k, 1.0, x, z) == doctest::Approx(k.eval(x, z)).epsilon(1e-15));

  // at z = 0 the rescaled kernel is eps^{-Q} kappa_x(0), Q = 4 on heisenberg
  const std::vector<double> zero{0.0, 0.0, 0.0};
  CHECK(rescale_kernel(k, 0.5, x, zero) ==
        doctest::Approx(16.0 * k.eval(x, zero)).epsilon(1e-14));

  // eps^Q rescale(kappa, eps, x, delta_eps w) == kappa_x(w)
  const double eps = 0.3;
  const std::vector<double> w{0.4, -0.7, 0.9};
  const std::vector<double> dw = dilate(heis().algebra(), eps, w);
  CHECK(std::pow(eps, 4) * rescale_kernel(k, eps, x, dw) ==
        doctest::Approx(k.eval(x, w)).epsilon(1e-13));

  // mass invariance: the rescaled kernel integrates to the unscaled mass
  const double R = kernel_tail_radius(k, 1e-12);
  const GridFunction base =
      sample_grid(GridSpec::tensor(Box::cube(3, R), 41),
                  [&](const double* zz) { return k.eval(x, {zz[0], zz[1], zz[2]}); });
  const GridSpec dil = GridSpec::tensor(Box::centered({R * eps, R * eps, R * eps * eps}), 41);
  const GridFunction scaled = sample_grid(
      dil, [&](const double* zz) { return rescale_kernel(k, eps, x, {zz[0], zz[1], zz[2]}); });
  CHECK(integrate(scaled) == doctest::Approx(integrate(base)).epsilon(1e-9));
}

TEST_CASE("sampled function interpolation") {
  CHECK_THROWS_AS(SampledFunction(std::function<double(const double*)>{}), ConfigError);

  GridFunction halton;
  halton.spec = GridSpec::qmc(Box::cube(1, 1.0), 5, 1);
  halton.values.assign(5, 1.0);
  CHECK_THROWS_AS(SampledFunction{halton}, DomainError);

  GridFunction short_vals = sample_grid(GridSpec::tensor(Box::cube(1, 1.0), 5),
                                        [](const double* y) { return y[0]; });
  short_vals.values.pop_back();
  CHECK_THROWS_AS(SampledFunction{short_vals}, FormatError);

  // cubic interpolation reproduces quadratics away from the boundary cells
  auto quad = [](const double* y) {
    return 2.0 + y[0] - 0.5 * y[1] + 0.25 * y[0] * y[1] + y[0] * y[0] - y[1] * y[1];
  };
  const SampledFunction s(sample_grid(GridSpec::tensor(Box::cube(2, 1.0), 9), quad));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-0.7, 0.7);
  for (int t = 0; t < 50; ++t) {
    const double y[2] = {U(rng), U(rng)};
    CHECK(s(y) == doctest::Approx(quad(y)).epsilon(1e-13));
  }

  // node values are hit exactly; outside the box the extension is zero
  const GridSpec gs = GridSpec::tensor(Box::cube(2, 1.0), 9);
  const GridFunction g = sample_grid(gs, quad);
  const QuadNodes nodes = make_nodes(gs);
  const SampledFunction sg{GridFunction(g)};
  for (long k = 0; k < nodes.count(); k += 7)
    CHECK(sg(nodes.point(k)) == doctest::Approx(g.values[static_cast<size_t>(k)]).epsilon(1e-13));
  const double far[2] = {1.5, 0.0};
  CHECK(sg(far) == 0.0);

  // third-order accuracy on a smooth 1d profile
  const SampledFunction s1(sample_grid(GridSpec::tensor(Box::cube(1, 1.0), 33),
                                       [](const double* y) { return std::sin(3.0 * y[0]); }));
  std::uniform_real_distribution<double> V(-0.9, 0.9);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double y = V(rng);
    worst = std::max(worst, std::abs(s1(&y) - std::sin(3.0 * y)));
  }
  CHECK(worst < 2e-3);
}

TEST_CASE("op matches the euclidean convolution oracle on the flat group") {
  const Kernel k = kernel_preset(flat3(), "default", Box::cube(3, 2.0));
  const double R = kernel_tail_radius(k, 1e-12);
  const int res = 41;
  const GridSpec z_spec = GridSpec::tensor(Box::cube(3, R), res);

  auto fv = [](const std::vector<double>& y) { return smooth_f(y.data()); };
  auto gv = [&](const std::vector<double>& z) { return k.z_part(z.data()); };
  const SampledFunction f{std::function<double(const double*)>(smooth_f)};

  for (double eps : {1.0, 0.5, 0.25}) {
    for (const auto& x : {std::vector<double>{0.1, -0.2, 0.3}, std::vector<double>{-0.4, 0.25, 0.0}}) {
      double got = 0.0;
      op_apply_at(k, eps, {&f}, x.data(), 1, z_spec, 1, &got);
      const double want = oracle::euclid_convolution(fv, gv, x, eps, R, res);
      CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
  }

  // the grid overload carries the same values onto x nodes
  const GridSpec x_spec = GridSpec::tensor(Box::cube(3, 0.5), 3);
  const GridFunction out = op_apply(k, 0.5, f, x_spec, z_spec);
  const QuadNodes xn = make_nodes(x_spec);
  const double want = oracle::euclid_convolution(
      fv, gv, {xn.point(13)[0], xn.point(13)[1], xn.point(13)[2]}, 0.5, R, res);
  CHECK(out.values[13] == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("op is an approximate identity as eps shrinks") {
  const std::vector<double> x{0.1, -0.2, 0.15};
  const SampledFunction f{std::function<double(const double*)>(smooth_f)};

  auto run = [&](const Group& G, const std::string& preset, const std::vector<double>& eps) {
    const Kernel k = kernel_preset(G, preset, Box::cube(3, 2.0));
    const GridSpec z_spec = default_z_grid(k, 41);
    ConvergenceTable t;
    for (double e : eps) {
      double v = 0.0;
      op_apply_at(k, e, {&f}, x.data(), 1, z_spec, 1, &v);
      t.rows.push_back({e, std::abs(v - kMass * smooth_f(x.data()))});
    }
    t.fit();
    return t;
  };

  // even kernel: second order, on the flat group and on heisenberg alike
  for (const Group* G : {&flat3(), &heis()}) {
    const ConvergenceTable t = run(*G, "default", dyadic_schedule(1, 5));
    CHECK(t.rows_used == 5);
    CHECK(t.fitted_slope >= 1.85);
    CHECK(t.fitted_slope <= 2.15);
    CHECK(t.monotone_decreasing());
  }
  // odd linear factor knocks the order down to one: for linear f the
  // expansion terminates and e(eps) = 0.6 S eps with S the second gaussian
  // moment, so both the slope and the constant are pinned
  const Kernel ko = kernel_preset(flat3(), "odd", Box::cube(3, 2.0));
  const GridSpec z_spec = default_z_grid(ko, 41);
  const SampledFunction lin{
      std::function<double(const double*)>([](const double* y) { return y[0]; })};
  const double S = 0.5 * std::sqrt(std::acos(-1.0) / 8.0) * (std::acos(-1.0) / 2.0);
  ConvergenceTable t;
  for (double e : dyadic_schedule(1, 5)) {
    double v = 0.0;
    op_apply_at(ko, e, {&lin}, x.data(), 1, z_spec, 1, &v);
    const double err = std::abs(v - kMass * x[0]);
    CHECK(err == doctest::Approx(0.6 * S * e).epsilon(1e-9));
    t.rows.push_back({e, err});
  }
  t.fit();
  CHECK(t.fitted_slope == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("op rejects bad inputs and is stable under refinement") {
  const Kernel k = kernel_preset(heis(), "default", Box::cube(3, 2.0));
  const SampledFunction f{std::function<double(const double*)>(smooth_f)};
  const std::vector<double> x{0.2, 0.1, -0.3};
  const double R = kernel_tail_radius(k, 1e-12);

  double v = 0.0;
  CHECK_THROWS_AS(op_apply_at(k, 0.0, {&f}, x.data(), 1, GridSpec::tensor(Box::cube(3, R), 21), 1, &v),
                  DomainError);
  CHECK_THROWS_AS(op_apply_at(k, 0.5, {&f}, x.data(), 1, GridSpec::tensor(Box::cube(2, R), 21), 1, &v),
                  ConfigError);
  CHECK_THROWS_AS(op_apply(k, 0.5, f, GridSpec::tensor(Box::cube(2, 1.0), 3),
                           GridSpec::tensor(Box::cube(3, R), 21)),
                  ConfigError);

  // doubling the z resolution barely moves the value: the integrand is smooth
  double coarse = 0.0, fine = 0.0;
  op_apply_at(k, 0.25, {&f}, x.data(), 1, GridSpec::tensor(Box::cube(3, R), 21), 1, &coarse);
  op_apply_at(k, 0.25, {&f}, x.data(), 1, GridSpec::tensor(Box::cube(3, R), 41), 1, &fine);
  CHECK(coarse == doctest::Approx(fine).epsilon(1e-6));

  // halton quadrature agrees with the tensor rule
  double qmc = 0.0;
  op_apply_at(k, 0.5, {&f}, x.data(), 1, GridSpec::qmc(Box::cube(3, R), 200000, 20240816u), 1, &qmc);
  double tens = 0.0;
  op_apply_at(k, 0.5, {&f}, x.data(), 1, GridSpec::tensor(Box::cube(3, R), 41), 1, &tens);
  CHECK(qmc == doctest::Approx(tens).epsilon(1e-2));
}

TEST_CASE("op results do not depend on the worker count") {
  const Kernel k = kernel_preset(heis(), "default", Box::cube(3, 2.0));
  const SampledFunction f{std::function<double(const double*)>(smooth_f)};
  const GridSpec x_spec = GridSpec::tensor(Box::cube(3, 0.8), 7);
  const GridSpec z_spec = default_z_grid(k, 21);
  const GridFunction a = op_apply(k, 0.5, f, x_spec, z_spec, 1);
  const GridFunction b = op_apply(k, 0.5, f, x_spec, z_spec, 4);
  CHECK(a.values == b.values);
}

TEST_CASE("bank application is laid out bank-major") {
  const Kernel k = kernel_preset(heis(), "default", Box::cube(3, 2.0));
  const auto bank = test_bank(Box::cube(3, 1.0), 0.1);
  const GridSpec z_spec = default_z_grid(k, 21);
  const double pts[6] = {0.1, 0.2, -0.1, -0.3, 0.0, 0.25};
  std::vector<double> joint(2 * 2, 0.0);
  op_apply_at(k, 0.5, {&bank[0], &bank[1]}, pts, 2, z_spec, 1, joint.data());
  for (int b = 0; b < 2; ++b) {
    std::vector<double> solo(2, 0.0);
    op_apply_at(k, 0.5, {&bank[static_cast<size_t>(b)]}, pts, 2, z_spec, 1, solo.data());
    CHECK(joint[static_cast<size_t>(b) * 2 + 0] == solo[0]);
    CHECK(joint[static_cast<size_t>(b) * 2 + 1] == solo[1]);
  }
}

TEST_CASE("under-resolution is flagged for grid-backed inputs only") {
  const Kernel k = kernel_preset(heis(), "default", Box::cube(3, 2.0));
  const GridSpec z_spec = default_z_grid(k, 21);
  const std::vector<double> x{0.0, 0.0, 0.0};
  const SampledFunction fc{std::function<double(const double*)>(smooth_f)};
  const SampledFunction fg{sample_grid(GridSpec::tensor(Box::cube(3, 1.0), 9), smooth_f)};

  double v = 0.0;
  bool warn = true;
  op_apply_at(k, 1.0, {&fg}, x.data(), 1, z_spec, 1, &v, &warn);
  CHECK_FALSE(warn);
  op_apply_at(k, 0.25, {&fg}, x.data(), 1, z_spec, 1, &v, &warn);
  CHECK(warn); // eps^2 shrinks the weight-2 axis below two cells
  op_apply_at(k, 0.25, {&fc}, x.data(), 1, z_spec, 1, &v, &warn);
  CHECK_FALSE(warn);
}

TEST_CASE("a0 seminorm") {
  const Box sup = Box::centered({1.6, 2.4, 1.8});
  const Kernel k = kernel_preset(heis(), "default", sup);
  const double r8 = kernel_tail_radius(k, 1e-8);
  const GridSpec x_spec = GridSpec::tensor(Box::centered({1.7, 2.5, 1.9}), 9);
  const GridSpec z_spec = GridSpec::tensor(Box::cube(3, r8 + 0.2), 33);

  // separable shortcut: max |x_part| is 1 on the plateau, so a0 is the
  // gaussian mass
  const double a0 = a0_seminorm(k, z_spec, x_spec);
  CHECK(a0 == doctest::Approx(kMass).epsilon(1e-6));

  // the per-profile path must agree with the separable shortcut
  Kernel k2 = k;
  k2.make_profile = [zp = k.z_part](const double*) { return zp; };
  CHECK(a0_seminorm(k2, z_spec, x_spec) == doctest::Approx(a0).epsilon(1e-12));

  // refinement stability
  const double fine = a0_seminorm(k, GridSpec::tensor(Box::cube(3, r8 + 0.2), 65),
                                  GridSpec::tensor(Box::centered({1.7, 2.5, 1.9}), 17));
  CHECK(std::abs(fine - a0) / a0 < 1e-4);

  // coverage violations are hard errors
  CHECK_THROWS_AS(a0_seminorm(k, z_spec, GridSpec::tensor(Box::centered({1.5, 2.5, 1.9}), 9)),
                  DomainError);
  CHECK_THROWS_AS(a0_seminorm(k, GridSpec::tensor(Box::cube(3, r8 - 0.2), 33), x_spec),
                  DomainError);
}

TEST_CASE("l2 inner product and norm") {
  const GridSpec spec = GridSpec::tensor(Box::cube(2, 1.0), 5);
  const GridFunction one = sample_grid(spec, [](const double*) { return 1.0; });
  const GridFunction lin = sample_grid(spec, [](const double* y) { return y[0] + y[1]; });
  CHECK(l2_inner(one, one) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(l2_norm(one) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(l2_inner(one, lin) == doctest::Approx(0.0).epsilon(1e-14));

  GridFunction other = sample_grid(GridSpec::tensor(Box::cube(2, 1.0), 7), [](const double*) { return 1.0; });
  CHECK_THROWS_AS(l2_inner(one, other), DomainError);
  GridFunction broken = one;
  broken.values.pop_back();
  CHECK_THROWS_AS(l2_inner(broken, broken), FormatError);
}

TEST_CASE("ell_epsilon obeys the a0 bound and approaches the mass limit") {
  const Box sup = Box::centered({2.0, 2.0, 2.0});
  const Kernel k = kernel_preset(heis(), "default", sup);
  const GridSpec u_spec = GridSpec::tensor(Box::cube(3, 1.0), 13);
  const GridFunction u = sample_grid(u_spec, [](const double* y) {
    return bump_c(y[0], 0.3) * bump_c(y[1], 0.3) * bump_c(y[2], 0.3);
  });
  const double u2 = l2_inner(u, u);

  const double r8 = kernel_tail_radius(k, 1e-8);
  const GridSpec z_spec = default_z_grid(k, 21);
  const double a0 = a0_seminorm(k, z_spec, GridSpec::tensor(Box::cube(3, 2.1), 9));
  REQUIRE(z_spec.box.hi[0] > r8);

  const double l1 = ell_epsilon(k, 1.0, u, z_spec, 4);
  CHECK(std::abs(l1) <= a0 * u2 * (1.0 + 1e-3));

  // u sits inside the kernel plateau, so Op_eps u -> mass * u
  const double ls = ell_epsilon(k, 1.0 / 32.0, u, z_spec, 4);
  CHECK(std::abs(ls) <= a0 * u2 * (1.0 + 2e-3));
  CHECK(ls / (kMass * u2) > 0.90);
  CHECK(ls / (kMass * u2) < 1.0 + 2e-3);
}

TEST_CASE("operator bound on a small bank") {
  const Kernel k = kernel_preset(heis(), "default", Box::centered({2.0, 2.0, 2.0}));
  const GridSpec x_spec = GridSpec::tensor(Box::cube(3, 1.0), 7);
  const GridSpec z_spec = default_z_grid(k, 21);
  const double a0 = a0_seminorm(k, z_spec, GridSpec::tensor(Box::cube(3, 2.1), 9));
  const auto bank = test_bank(Box::cube(3, 1.0), 0.1);
  for (double eps : {1.0, 0.25}) {
    for (int j = 0; j < 2; ++j) {
      const GridFunction of = op_apply(k, eps, bank[static_cast<size_t>(j)], x_spec, z_spec, 4);
      const GridFunction fs =
          sample_grid(x_spec, [&](const double* y) { return bank[static_cast<size_t>(j)](y); });
      CHECK(l2_norm(of) <= (a0 + 1e-3 * a0) * l2_norm(fs));
    }
  }
}

TEST_CASE("grid-backed and callable inputs give matching op values") {
  const Kernel k = kernel_preset(heis(), "default", Box::centered({2.0, 2.0, 2.0}));
  const auto bank = test_bank(Box::cube(3, 1.5), 0.1);
  const SampledFunction fg{sample_grid(GridSpec::tensor(Box::cube(3, 1.5), 49),
                                       [&](const double* y) { return bank[0](y); })};
  const GridSpec x_spec = GridSpec::tensor(Box::cube(3, 0.3), 3);
  const GridSpec z_spec = default_z_grid(k, 33);
  const GridFunction a = op_apply(k, 0.5, bank[0], x_spec, z_spec, 4);
  const GridFunction b = op_apply(k, 0.5, fg, x_spec, z_spec, 4);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) {
    num += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
    den += a.values[i] * a.values[i];
  }
  CHECK(std::sqrt(num / den) < 5e-3);
}

TEST_CASE("diagonal truncation residual") {
  const Box sup = Box::centered({1.6, 2.4, 1.8});
  const auto bank = test_bank(Box::cube(3, 1.5), 0.1);
  const Kernel k05 = make_bump_gauss_kernel(heis(), sup, 0.5, {}, 1.0);
  const GridSpec x_spec = GridSpec::tensor(Box::cube(3, 0.5), 5);
  const GridSpec z_spec = default_z_grid(k05, 41);

  CHECK_THROWS_AS(diagonal_truncation_residual(k05, 0.0, bank[0], 0.6, 1.2, x_spec, z_spec),
                  DomainError);
  CHECK_THROWS_AS(diagonal_truncation_residual(k05, 0.5, bank[0], 1.2, 0.6, x_spec, z_spec),
                  DomainError);
  CHECK_THROWS_AS(diagonal_truncation_residual(k05, 0.5, bank[0], -1.0, 0.5, x_spec, z_spec),
                  DomainError);

  // when every dilated node stays inside the r1 ball the cut-off is inert
  const Kernel k2 = kernel_preset(heis(), "default", sup);
  const GridSpec z2 = default_z_grid(k2, 21);
  const double R = z2.box.hi[0];
  const double eps0 = 1.0 / 16.0;
  const double reach = eps0 * (2.0 * R) + std::sqrt(eps0 * eps0 * R);
  CHECK(diagonal_truncation_residual(k2, eps0, bank[0], reach + 0.1, reach + 0.2, x_spec, z2) ==
        0.0);

  const SampledFunction zero{std::function<double(const double*)>([](const double*) { return 0.0; })};
  CHECK(diagonal_truncation_residual(k05, 0.5, zero, 0.6, 1.2, x_spec, z_spec) == 0.0);

  // independent recomputation with local loops on a tiny x grid
  {
    const double eps = 0.5, r1 = 0.6, r0 = 1.2;
    const GridSpec xs = GridSpec::tensor(Box::cube(3, 0.5), 3);
    auto step = [](double t) {
      if (t <= 0.0) return 0.0;
      if (t >= 1.0) return 1.0;
      const double e1 = std::exp(-1.0 / t);
      return e1 / (e1 + std::exp(-1.0 / (1.0 - t)));
    };
    const double Rz = z_spec.box.hi[0];
    const int res = 41;
    const double h = 2.0 * Rz / (res - 1);
    double acc2 = 0.0;
    const double hx = 0.5;
    for (int ia = 0; ia < 3; ++ia)
      for (int ib = 0; ib < 3; ++ib)
        for (int ic = 0; ic < 3; ++ic) {
          const double x0 = -0.5 + hx * ia, x1 = -0.5 + hx * ib, x2 = -0.5 + hx * ic;
          double wx = 1.0;
          for (int i : {ia, ib, ic}) wx *= (i == 0 || i == 2) ? 0.5 * hx : hx;
          const double xf = k05.x_part(std::vector<double>{x0, x1, x2}.data());
          double d = 0.0;
          for (int ja = 0; ja < res; ++ja)
            for (int jb = 0; jb < res; ++jb)
              for (int jc = 0; jc < res; ++jc) {
                const double z0 = -Rz + h * ja, z1 = -Rz + h * jb, z2v = -Rz + h * jc;
                double wz = 1.0;
                for (int j : {ja, jb, jc}) wz *= (j == 0 || j == res - 1) ? 0.5 * h : h;
                const double q = eps * (std::abs(z0) + std::abs(z1)) +
                                 std::sqrt(eps * eps * std::abs(z2v));
                const double cut = step((q - r1) / (r0 - r1));
                if (cut == 0.0) continue;
                // y = x * delta_eps(z)^{-1} by the closed heisenberg law
                const double p = -eps * z0, qy = -eps * z1, ty = -eps * eps * z2v;
                const double y0 = x0 + p, y1 = x1 + qy;
                const double y2 = x2 + ty + 0.5 * (x0 * qy - x1 * p);
                const double kz =
                    std::exp(-0.5 * (z0 * z0 + z1 * z1 + z2v * z2v));
                d += wz * kz * cut * bank[0](std::vector<double>{y0, y1, y2}.data());
              }
          acc2 += wx * (xf * d) * (xf * d);
        }
    const double want = std::sqrt(acc2);
    const double got = diagonal_truncation_residual(k05, eps, bank[0], r1, r0, xs, z_spec, 4);
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
  }

  // the residual collapses super-polynomially: fitted slope well above 3
  ConvergenceTable t;
  for (double eps : {0.5, 0.3536, 0.25, 0.1768}) {
    t.rows.push_back(
        {eps, diagonal_truncation_residual(k05, eps, bank[0], 0.6, 1.2, x_spec, z_spec, 4)});
  }
  t.fit();
  CHECK(t.rows_used >= 3);
  CHECK(t.fitted_slope >= 3.0);
  CHECK(t.monotone_decreasing());
}

TEST_CASE("test bank functions stay inside the shrunk box") {
  const Box box = Box::cube(3, 1.0);
  const auto bank = test_bank(box, 0.2);
  REQUIRE(bank.size() == 5);
  const double center[3] = {0.0, 0.0, 0.0};
  CHECK(bank[0](center) == doctest::Approx(1.0));
  for (const auto& f : bank) {
    const double edge[3] = {0.85, 0.0, 0.0};
    const double out[3] = {0.95, 0.2, -0.1};
    CHECK(std::abs(f(edge)) <= 1.0);
    CHECK(f(out) == 0.0);
  }
  CHECK_THROWS_AS(test_bank(box, 1.0), ConfigError);
}

} // TEST_SUITE
