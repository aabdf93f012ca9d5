#include "carnot/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "carnot/errors.hpp"

namespace carnot {

double smoothstep_c(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

double bump_c(double s, double plateau) {
  const double u = std::abs(s);
  if (u >= 1.0) return 0.0;
  if (u <= plateau) return 1.0;
  return smoothstep_c((1.0 - u) / (1.0 - plateau));
}

namespace {

constexpr int kMaxDim = 10;

void validate_spec(const GridSpec& s) {
  const int n = s.dim();
  if (n == 0 || n > kMaxDim) throw ConfigError("grid spec: unsupported dimension");
  if (n != static_cast<int>(s.res.size()))
    throw ConfigError("grid spec: resolution list must match the box dimension");
  for (int i = 0; i < n; ++i)
    if (!(s.box.hi[i] > s.box.lo[i])) throw ConfigError("grid spec: empty box axis");
  for (int r : s.res)
    if (r < 2) throw ConfigError("grid spec: resolution must be at least 2 per axis");
  if (s.rule == Quadrature::Halton && s.qmc_count < 1)
    throw ConfigError("grid spec: qmc count must be positive");
}

double radical_inverse(long k, int base) {
  const double inv = 1.0 / base;
  double f = inv, r = 0.0;
  while (k > 0) {
    r += f * static_cast<double>(k % base);
    k /= base;
    f *= inv;
  }
  return r;
}

void parallel_for(long n, int workers, const std::function<void(long, long)>& body) {
  if (workers <= 1 || n < 2) {
    body(0, n);
    return;
  }
  const int w = static_cast<int>(std::min<long>(workers, n));
  const long chunk = (n + w - 1) / w;
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex mu;
  for (int t = 0; t < w; ++t) {
    const long lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        body(lo, hi);
      } catch (...) {
        const std::lock_guard<std::mutex> g(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

double catmull_rom(const double p[4], double t) {
  return 0.5 * (2.0 * p[1] +
                t * (p[2] - p[0] +
                     t * (2.0 * p[0] - 5.0 * p[1] + 4.0 * p[2] - p[3] +
                          t * (3.0 * (p[1] - p[2]) + p[3] - p[0]))));
}

double interp_rec(const GridFunction& f, const long* strides, const int* i0, const double* t,
                  int axis, long offset) {
  const int n = f.spec.dim();
  double p[4];
  for (int s = 0; s < 4; ++s) {
    const int j = std::clamp(i0[axis] - 1 + s, 0, f.spec.res[axis] - 1);
    const long off = offset + static_cast<long>(j) * strides[axis];
    p[s] = (axis + 1 == n) ? f.values[static_cast<size_t>(off)]
                           : interp_rec(f, strides, i0, t, axis + 1, off);
  }
  return catmull_rom(p, t[axis]);
}

double interp_cubic(const GridFunction& f, const double* y) {
  const int n = f.spec.dim();
  int i0[kMaxDim];
  double t[kMaxDim];
  long strides[kMaxDim];
  long s = 1;
  for (int i = n - 1; i >= 0; --i) {
    strides[i] = s;
    s *= f.spec.res[i];
  }
  for (int i = 0; i < n; ++i) {
    if (y[i] < f.spec.box.lo[i] || y[i] > f.spec.box.hi[i]) return 0.0;
    const double h = f.spec.box.length(i) / (f.spec.res[i] - 1);
    const double u = (y[i] - f.spec.box.lo[i]) / h;
    int c = static_cast<int>(std::floor(u));
    c = std::clamp(c, 0, f.spec.res[i] - 2);
    i0[i] = c;
    t[i] = u - c;
  }
  return interp_rec(f, strides, i0, t, 0, 0);
}

// Per-(eps, z grid) data shared by every x point of an op pass.
struct ZPrep {
  QuadNodes nodes;
  std::vector<double> dz_inv; // count x n, delta_eps(z^{-1})
  std::vector<double> zvals;  // separable kernels only
};

ZPrep prep_z(const Kernel& kappa, double eps, const GridSpec& z_spec) {
  ZPrep p{make_nodes(z_spec), {}, {}};
  const int n = p.nodes.dim;
  if (n != kappa.G->dim()) throw ConfigError("op: z grid dimension mismatch");
  const GradedLieAlgebra& A = kappa.G->algebra();
  p.dz_inv.resize(p.nodes.pts.size());
  std::vector<double> zi(n);
  for (long j = 0; j < p.nodes.count(); ++j) {
    const double* z = p.nodes.point(j);
    for (int i = 0; i < n; ++i) zi[i] = -z[i];
    dilate(A, eps, zi.data(), p.dz_inv.data() + static_cast<size_t>(j) * n);
  }
  if (kappa.separable()) {
    p.zvals.resize(static_cast<size_t>(p.nodes.count()));
    for (long j = 0; j < p.nodes.count(); ++j) p.zvals[j] = kappa.z_part(p.nodes.point(j));
  }
  return p;
}

std::vector<double> quad_weights(const GridSpec& spec) { return make_nodes(spec).wts; }

} // namespace

long GridSpec::node_count() const {
  if (rule == Quadrature::Halton) return qmc_count;
  long n = 1;
  for (int r : res) n *= r;
  return n;
}

bool GridSpec::operator==(const GridSpec& o) const {
  if (rule != o.rule || res != o.res || box.lo != o.box.lo || box.hi != o.box.hi) return false;
  if (rule == Quadrature::Halton && (qmc_count != o.qmc_count || seed != o.seed)) return false;
  return true;
}

GridSpec GridSpec::tensor(const Box& box, int res_per_axis) {
  GridSpec s;
  s.box = box;
  s.res.assign(box.dim(), res_per_axis);
  return s;
}

GridSpec GridSpec::qmc(const Box& box, long count, std::uint64_t seed) {
  GridSpec s;
  s.box = box;
  s.res.assign(box.dim(), 2);
  s.rule = Quadrature::Halton;
  s.qmc_count = count;
  s.seed = seed;
  return s;
}

QuadNodes make_nodes(const GridSpec& spec) {
  validate_spec(spec);
  const int n = spec.dim();
  QuadNodes q;
  q.dim = n;
  if (spec.rule == Quadrature::Trapezoid) {
    const long count = spec.node_count();
    q.pts.resize(static_cast<size_t>(count) * n);
    q.wts.assign(static_cast<size_t>(count), 1.0);
    std::vector<double> h(n);
    for (int i = 0; i < n; ++i) h[i] = spec.box.length(i) / (spec.res[i] - 1);
    std::vector<int> idx(n, 0);
    for (long k = 0; k < count; ++k) {
      double w = 1.0;
      for (int i = 0; i < n; ++i) {
        q.pts[static_cast<size_t>(k) * n + i] = spec.box.lo[i] + idx[i] * h[i];
        w *= h[i] * ((idx[i] == 0 || idx[i] == spec.res[i] - 1) ? 0.5 : 1.0);
      }
      q.wts[static_cast<size_t>(k)] = w;
      for (int i = n - 1; i >= 0; --i) {
        if (++idx[i] < spec.res[i]) break;
        idx[i] = 0;
      }
    }
    return q;
  }
  static const int primes[kMaxDim] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> shift(n);
  for (auto& s : shift) s = U(rng);
  const long count = spec.qmc_count;
  q.pts.resize(static_cast<size_t>(count) * n);
  q.wts.assign(static_cast<size_t>(count), spec.box.volume() / static_cast<double>(count));
  for (long k = 0; k < count; ++k)
    for (int i = 0; i < n; ++i) {
      double u = radical_inverse(k + 1, primes[i]) + shift[i];
      u -= std::floor(u);
      q.pts[static_cast<size_t>(k) * n + i] = spec.box.lo[i] + u * spec.box.length(i);
    }
  return q;
}

std::string GridFunction::to_csv() const {
  if (spec.rule != Quadrature::Trapezoid)
    throw DomainError("grid csv: tensor grids only; use the binary format");
  validate_spec(spec);
  if (static_cast<long>(values.size()) != spec.node_count())
    throw FormatError("grid csv: value count does not match the grid");
  const int n = spec.dim();
  std::ostringstream out;
  out.precision(17);
  for (int i = 1; i <= n; ++i) out << "i" << i << ",";
  out << "value\n";
  std::vector<int> idx(n, 0);
  for (double v : values) {
    for (int i = 0; i < n; ++i) out << idx[i] << ",";
    out << v << "\n";
    for (int i = n - 1; i >= 0; --i) {
      if (++idx[i] < spec.res[i]) break;
      idx[i] = 0;
    }
  }
  auto list = [&out](const char* key, auto begin, auto end) {
    out << " " << key << "=";
    for (auto it = begin; it != end; ++it) out << (it == begin ? "" : ",") << *it;
  };
  out << "# grid";
  list("res", spec.res.begin(), spec.res.end());
  list("lo", spec.box.lo.begin(), spec.box.lo.end());
  list("hi", spec.box.hi.begin(), spec.box.hi.end());
  out << "\n";
  return out.str();
}

GridFunction sample_grid(const GridSpec& spec, const std::function<double(const double*)>& fn) {
  QuadNodes q = make_nodes(spec);
  GridFunction f;
  f.spec = spec;
  f.values.resize(static_cast<size_t>(q.count()));
  for (long k = 0; k < q.count(); ++k) f.values[static_cast<size_t>(k)] = fn(q.point(k));
  return f;
}

namespace {

std::vector<double> parse_list(const std::string& token, const std::string& key) {
  std::vector<double> out;
  std::istringstream in(token);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw FormatError("grid csv: bad " + key + " entry '" + item + "'");
    }
  }
  if (out.empty()) throw FormatError("grid csv: empty " + key + " list");
  return out;
}

} // namespace

GridFunction read_grid_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("grid csv: empty input");
  int n = 0;
  {
    std::istringstream hdr(line);
    std::string col;
    std::vector<std::string> cols;
    while (std::getline(hdr, col, ',')) cols.push_back(col);
    if (cols.size() < 2 || cols.back() != "value")
      throw FormatError("grid csv: header must be i1,...,in,value");
    n = static_cast<int>(cols.size()) - 1;
    for (int i = 0; i < n; ++i)
      if (cols[i] != "i" + std::to_string(i + 1))
        throw FormatError("grid csv: header must be i1,...,in,value");
  }

  std::vector<std::vector<int>> indices;
  std::vector<double> vals;
  GridSpec spec;
  bool have_spec = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line);
      std::string tok;
      meta >> tok; // '#'
      meta >> tok; // 'grid'
      if (tok != "grid") continue;
      std::vector<int> res;
      std::vector<double> lo, hi;
      while (meta >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) throw FormatError("grid csv: malformed summary token");
        std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "res") {
          for (double v : parse_list(val, key)) res.push_back(static_cast<int>(v));
        } else if (key == "lo") {
          lo = parse_list(val, key);
        } else if (key == "hi") {
          hi = parse_list(val, key);
        }
      }
      if (static_cast<int>(res.size()) != n || static_cast<int>(lo.size()) != n ||
          static_cast<int>(hi.size()) != n)
        throw FormatError("grid csv: summary line does not match the header dimension");
      spec.box.lo = lo;
      spec.box.hi = hi;
      spec.res = res;
      have_spec = true;
      continue;
    }
    std::istringstream row(line);
    std::string item;
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) {
      if (!std::getline(row, item, ',')) throw FormatError("grid csv: short row");
      try {
        idx[i] = std::stoi(item);
      } catch (const std::exception&) {
        throw FormatError("grid csv: bad index '" + item + "'");
      }
    }
    if (!std::getline(row, item, ',')) throw FormatError("grid csv: missing value");
    try {
      size_t pos = 0;
      vals.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw FormatError("grid csv: bad value '" + item + "'");
    }
    indices.push_back(std::move(idx));
  }
  if (!have_spec) throw FormatError("grid csv: missing '# grid' summary line");
  validate_spec(spec);
  if (static_cast<long>(vals.size()) != spec.node_count())
    throw FormatError("grid csv: row count does not match the grid");

  GridFunction f;
  f.spec = spec;
  f.values.assign(vals.size(), 0.0);
  for (size_t k = 0; k < vals.size(); ++k) {
    long flat = 0;
    for (int i = 0; i < n; ++i) {
      if (indices[k][i] < 0 || indices[k][i] >= spec.res[i])
        throw FormatError("grid csv: index out of range");
      flat = flat * spec.res[i] + indices[k][i];
    }
    f.values[static_cast<size_t>(flat)] = vals[k];
  }
  return f;
}

namespace {

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw FormatError("grid binary: truncated input");
  return v;
}

} // namespace

void write_grid_binary(const GridFunction& f, std::ostream& out) {
  validate_spec(f.spec);
  if (static_cast<long>(f.values.size()) != f.spec.node_count())
    throw FormatError("grid binary: value count does not match the grid");
  out.write("CGF1", 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.spec.dim()));
  put<std::uint32_t>(out, f.spec.rule == Quadrature::Halton ? 1u : 0u);
  put<std::int64_t>(out, f.spec.qmc_count);
  put<std::uint64_t>(out, f.spec.seed);
  for (int i = 0; i < f.spec.dim(); ++i) {
    put<std::int32_t>(out, f.spec.res[i]);
    put<double>(out, f.spec.box.lo[i]);
    put<double>(out, f.spec.box.hi[i]);
  }
  put<std::int64_t>(out, static_cast<std::int64_t>(f.values.size()));
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
}

GridFunction read_grid_binary(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "CGF1") throw FormatError("grid binary: bad magic");
  GridFunction f;
  const auto dim = get<std::uint32_t>(in);
  if (dim == 0 || dim > kMaxDim) throw FormatError("grid binary: bad dimension");
  const auto rule = get<std::uint32_t>(in);
  if (rule > 1) throw FormatError("grid binary: bad rule");
  f.spec.rule = rule ? Quadrature::Halton : Quadrature::Trapezoid;
  f.spec.qmc_count = get<std::int64_t>(in);
  f.spec.seed = get<std::uint64_t>(in);
  for (std::uint32_t i = 0; i < dim; ++i) {
    f.spec.res.push_back(get<std::int32_t>(in));
    f.spec.box.lo.push_back(get<double>(in));
    f.spec.box.hi.push_back(get<double>(in));
  }
  validate_spec(f.spec);
  const auto count = get<std::int64_t>(in);
  if (count != f.spec.node_count()) throw FormatError("grid binary: value count mismatch");
  f.values.resize(static_cast<size_t>(count));
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!in) throw FormatError("grid binary: truncated values");
  return f;
}

double Kernel::eval(const std::vector<double>& x, const std::vector<double>& z) const {
  const double xf = x_support.contains(x) ? x_part(x.data()) : 0.0;
  if (xf == 0.0) return 0.0;
  if (separable()) return xf * z_part(z.data());
  return xf * make_profile(x.data())(z.data());
}

Kernel make_bump_gauss_kernel(const Group& G, const Box& x_support, double a,
                              const std::vector<double>& p_lin, double p_const, double plateau) {
  if (!(a > 0.0)) throw ConfigError("kernel: gaussian rate must be positive");
  if (x_support.dim() != G.dim()) throw ConfigError("kernel: x_support dimension mismatch");
  if (!p_lin.empty() && static_cast<int>(p_lin.size()) != G.dim())
    throw ConfigError("kernel: p_lin needs one entry per coordinate");
  if (!(plateau >= 0.0) || plateau >= 1.0) throw ConfigError("kernel: plateau must lie in [0,1)");

  Kernel k;
  k.G = &G;
  k.x_support = x_support;
  const int n = G.dim();
  std::vector<double> mid(n), half(n);
  for (int i = 0; i < n; ++i) {
    mid[i] = 0.5 * (x_support.lo[i] + x_support.hi[i]);
    half[i] = 0.5 * (x_support.hi[i] - x_support.lo[i]);
    if (!(half[i] > 0.0)) throw ConfigError("kernel: empty x_support axis");
  }
  k.x_part = [mid, half, plateau, n](const double* x) {
    double v = 1.0;
    for (int i = 0; i < n; ++i) {
      v *= bump_c((x[i] - mid[i]) / half[i], plateau);
      if (v == 0.0) return 0.0;
    }
    return v;
  };
  const std::vector<double> p = p_lin.empty() ? std::vector<double>(n, 0.0) : p_lin;
  k.z_part = [p, p_const, a, n](const double* z) {
    double lin = p_const, r2 = 0.0;
    for (int i = 0; i < n; ++i) {
      lin += p[i] * z[i];
      r2 += z[i] * z[i];
    }
    return lin * std::exp(-a * r2);
  };
  double pn = 0.0;
  for (double v : p) pn += v * v;
  pn = std::sqrt(pn);
  k.env_a = a;
  k.env_deg = pn > 0.0 ? 1 : 0;
  k.env_amp = std::max(std::abs(p_const), pn);
  return k;
}

Kernel kernel_preset(const Group& G, const std::string& id, const Box& x_support) {
  if (id == "default") return make_bump_gauss_kernel(G, x_support, 2.0, {}, 1.0);
  if (id == "odd") {
    std::vector<double> p(G.dim(), 0.0);
    p[0] = 0.6;
    return make_bump_gauss_kernel(G, x_support, 2.0, p, 1.0);
  }
  throw ConfigError("unknown kernel preset '" + id + "'");
}

double kernel_tail_radius(const Kernel& kappa, double tol) {
  if (!(tol > 0.0) || !(tol < 1.0)) throw ConfigError("tail tolerance must lie in (0,1)");
  const int n = kappa.G->dim();
  const double a = kappa.env_a;
  const double dr = 1e-3;
  const double r_stop = std::sqrt(700.0 / a) + n + kappa.env_deg + 1.0;
  const long m = static_cast<long>(r_stop / dr) + 2;
  std::vector<double> g(static_cast<size_t>(m));
  for (long i = 0; i < m; ++i) {
    const double r = static_cast<double>(i) * dr;
    g[static_cast<size_t>(i)] =
        std::pow(1.0 + r, kappa.env_deg) * std::exp(-a * r * r) * std::pow(r, n - 1);
  }
  std::vector<double> tail(static_cast<size_t>(m), 0.0);
  for (long i = m - 2; i >= 0; --i)
    tail[static_cast<size_t>(i)] =
        tail[static_cast<size_t>(i + 1)] + 0.5 * (g[static_cast<size_t>(i)] + g[static_cast<size_t>(i + 1)]) * dr;
  const double total = tail[0];
  if (!(total > 0.0)) return 1.0;
  long i = m - 1;
  while (i > 0 && tail[static_cast<size_t>(i - 1)] <= tol * total) --i;
  return static_cast<double>(i) * dr;
}

GridSpec default_z_grid(const Kernel& kappa, int res, double tol) {
  const double r = kernel_tail_radius(kappa, tol);
  return GridSpec::tensor(Box::cube(kappa.G->dim(), r), res);
}

double rescale_kernel(const Kernel& kappa, double eps, const std::vector<double>& x,
                      const std::vector<double>& z) {
  if (!(eps > 0.0)) throw DomainError("rescale_kernel: eps must be positive");
  const std::vector<double> zs = dilate(kappa.G->algebra(), 1.0 / eps, z);
  return std::pow(eps, -kappa.G->hom_dim()) * kappa.eval(x, zs);
}

SampledFunction::SampledFunction(std::function<double(const double*)> fn) : m_fn(std::move(fn)) {
  if (!m_fn) throw ConfigError("sampled function: empty callable");
}

SampledFunction::SampledFunction(GridFunction f) {
  if (f.spec.rule != Quadrature::Trapezoid)
    throw DomainError("sampled function: interpolation needs a tensor grid");
  validate_spec(f.spec);
  if (static_cast<long>(f.values.size()) != f.spec.node_count())
    throw FormatError("sampled function: value count does not match the grid");
  auto g = std::make_shared<const GridFunction>(std::move(f));
  m_grid = g;
  m_fn = [g](const double* y) { return interp_cubic(*g, y); };
}

void op_apply_at(const Kernel& kappa, double eps, const std::vector<const SampledFunction*>& bank,
                 const double* pts, long n_pts, const GridSpec& z_spec, int workers, double* out,
                 bool* under_resolved) {
  if (!(eps > 0.0)) throw DomainError("op_apply: eps must be positive");
  const Group& G = *kappa.G;
  const int n = G.dim();
  const ZPrep zp = prep_z(kappa, eps, z_spec);

  if (under_resolved) {
    *under_resolved = false;
    for (const auto* f : bank) {
      const GridSpec* gs = f->grid();
      if (!gs || gs->dim() != n) continue;
      for (int i = 0; i < n; ++i) {
        const double rad = std::max(std::abs(z_spec.box.lo[i]), std::abs(z_spec.box.hi[i]));
        const double width = std::pow(eps, G.algebra().weight(i)) * rad;
        const double cell = gs->box.length(i) / (gs->res[i] - 1);
        if (width < 2.0 * cell) *under_resolved = true;
      }
    }
  }

  const int nb = static_cast<int>(bank.size());
  const bool sep = kappa.separable();
  parallel_for(n_pts, workers, [&](long lo, long hi) {
    std::vector<double> y(n);
    std::vector<double> acc(static_cast<size_t>(nb));
    for (long k = lo; k < hi; ++k) {
      const double* x = pts + static_cast<size_t>(k) * n;
      const double xf = kappa.x_support.contains(x) ? kappa.x_part(x) : 0.0;
      if (xf == 0.0) {
        for (int b = 0; b < nb; ++b) out[static_cast<size_t>(b) * n_pts + k] = 0.0;
        continue;
      }
      std::function<double(const double*)> prof;
      if (!sep) prof = kappa.make_profile(x);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (long j = 0; j < zp.nodes.count(); ++j) {
        G.multiply(x, zp.dz_inv.data() + static_cast<size_t>(j) * n, y.data());
        const double kz = sep ? zp.zvals[static_cast<size_t>(j)] : prof(zp.nodes.point(j));
        const double w = zp.nodes.wts[static_cast<size_t>(j)] * kz;
        if (w == 0.0) continue;
        for (int b = 0; b < nb; ++b) acc[static_cast<size_t>(b)] += w * (*bank[b])(y.data());
      }
      for (int b = 0; b < nb; ++b) out[static_cast<size_t>(b) * n_pts + k] = xf * acc[static_cast<size_t>(b)];
    }
  });
}

GridFunction op_apply(const Kernel& kappa, double eps, const SampledFunction& f,
                      const GridSpec& x_spec, const GridSpec& z_spec, int workers,
                      bool* under_resolved) {
  const QuadNodes xn = make_nodes(x_spec);
  if (xn.dim != kappa.G->dim()) throw ConfigError("op: x grid dimension mismatch");
  GridFunction g;
  g.spec = x_spec;
  g.values.assign(static_cast<size_t>(xn.count()), 0.0);
  op_apply_at(kappa, eps, {&f}, xn.pts.data(), xn.count(), z_spec, workers, g.values.data(),
              under_resolved);
  return g;
}

GridFunction op_apply(const Kernel& kappa, double eps, const GridFunction& f,
                      const GridSpec& x_spec, const GridSpec& z_spec, int workers,
                      bool* under_resolved) {
  return op_apply(kappa, eps, SampledFunction(f), x_spec, z_spec, workers, under_resolved);
}

double a0_seminorm(const Kernel& kappa, const GridSpec& z_spec, const GridSpec& x_spec) {
  const int n = kappa.G->dim();
  if (z_spec.dim() != n || x_spec.dim() != n) throw ConfigError("a0: grid dimension mismatch");
  for (int i = 0; i < n; ++i)
    if (x_spec.box.lo[i] > kappa.x_support.lo[i] || x_spec.box.hi[i] < kappa.x_support.hi[i])
      throw DomainError("a0: x grid does not cover the kernel x-support");
  const double r8 = kernel_tail_radius(kappa, 1e-8);
  for (int i = 0; i < n; ++i)
    if (z_spec.box.lo[i] > -r8 || z_spec.box.hi[i] < r8)
      throw DomainError("a0: z grid does not cover the envelope tail at 1e-8");

  const QuadNodes zn = make_nodes(z_spec);
  const QuadNodes xn = make_nodes(x_spec);
  if (kappa.separable()) {
    double xmax = 0.0;
    for (long k = 0; k < xn.count(); ++k) {
      const double* x = xn.point(k);
      if (kappa.x_support.contains(x)) xmax = std::max(xmax, std::abs(kappa.x_part(x)));
    }
    double zint = 0.0;
    for (long j = 0; j < zn.count(); ++j)
      zint += zn.wts[static_cast<size_t>(j)] * std::abs(kappa.z_part(zn.point(j)));
    return xmax * zint;
  }
  std::vector<double> sup(static_cast<size_t>(zn.count()), 0.0);
  for (long k = 0; k < xn.count(); ++k) {
    const double* x = xn.point(k);
    if (!kappa.x_support.contains(x)) continue;
    const double xf = std::abs(kappa.x_part(x));
    if (xf == 0.0) continue;
    const auto prof = kappa.make_profile(x);
    for (long j = 0; j < zn.count(); ++j)
      sup[static_cast<size_t>(j)] =
          std::max(sup[static_cast<size_t>(j)], xf * std::abs(prof(zn.point(j))));
  }
  double s = 0.0;
  for (long j = 0; j < zn.count(); ++j) s += zn.wts[static_cast<size_t>(j)] * sup[static_cast<size_t>(j)];
  return s;
}

double l2_inner(const GridFunction& f, const GridFunction& g) {
  if (!(f.spec == g.spec)) throw DomainError("l2: grid specs differ");
  if (f.values.size() != g.values.size() ||
      static_cast<long>(f.values.size()) != f.spec.node_count())
    throw FormatError("l2: value count does not match the grid");
  const std::vector<double> w = quad_weights(f.spec);
  double s = 0.0;
  for (size_t k = 0; k < f.values.size(); ++k) s += w[k] * f.values[k] * g.values[k];
  return s;
}

double l2_norm(const GridFunction& f) { return std::sqrt(std::max(0.0, l2_inner(f, f))); }

double ell_epsilon(const Kernel& kappa, double eps, const GridFunction& u, const GridSpec& z_spec,
                   int workers) {
  const GridFunction ou = op_apply(kappa, eps, SampledFunction(u), u.spec, z_spec, workers);
  return l2_inner(ou, u);
}

double diagonal_truncation_residual(const Kernel& kappa, double eps, const SampledFunction& f,
                                    double r1, double r0, const GridSpec& x_spec,
                                    const GridSpec& z_spec, int workers) {
  if (!(eps > 0.0)) throw DomainError("truncation residual: eps must be positive");
  if (!(r1 > 0.0) || !(r1 < r0)) throw DomainError("truncation residual: need 0 < r1 < r0");
  const Group& G = *kappa.G;
  const int n = G.dim();
  const ZPrep zp = prep_z(kappa, eps, z_spec);

  // nodes where the complementary cut-off 1 - chi(delta_eps z) is nonzero
  std::vector<long> act;
  std::vector<double> fac;
  std::vector<double> dz(n);
  for (long j = 0; j < zp.nodes.count(); ++j) {
    dilate(G.algebra(), eps, zp.nodes.point(j), dz.data());
    const double u = (quasi_norm(G.algebra(), dz.data()) - r1) / (r0 - r1);
    const double one_minus_chi = smoothstep_c(u);
    if (one_minus_chi == 0.0) continue;
    act.push_back(j);
    fac.push_back(one_minus_chi);
  }

  const QuadNodes xn = make_nodes(x_spec);
  if (xn.dim != n) throw ConfigError("op: x grid dimension mismatch");
  GridFunction d;
  d.spec = x_spec;
  d.values.assign(static_cast<size_t>(xn.count()), 0.0);
  if (!act.empty()) {
    const bool sep = kappa.separable();
    parallel_for(xn.count(), workers, [&](long lo, long hi) {
      std::vector<double> y(n);
      for (long k = lo; k < hi; ++k) {
        const double* x = xn.point(k);
        const double xf = kappa.x_support.contains(x) ? kappa.x_part(x) : 0.0;
        if (xf == 0.0) continue;
        std::function<double(const double*)> prof;
        if (!sep) prof = kappa.make_profile(x);
        double acc = 0.0;
        for (size_t t = 0; t < act.size(); ++t) {
          const long j = act[t];
          G.multiply(x, zp.dz_inv.data() + static_cast<size_t>(j) * n, y.data());
          const double kz = sep ? zp.zvals[static_cast<size_t>(j)] : prof(zp.nodes.point(j));
          acc += zp.nodes.wts[static_cast<size_t>(j)] * kz * fac[t] * f(y.data());
        }
        d.values[static_cast<size_t>(k)] = xf * acc;
      }
    });
  }
  return l2_norm(d);
}

std::vector<SampledFunction> test_bank(const Box& box, double margin) {
  const int n = box.dim();
  if (n == 0) throw ConfigError("test bank: empty box");
  static const double cfrac[5][3] = {{0.0, 0.0, 0.0},
                                     {0.3, -0.15, 0.2},
                                     {-0.3, 0.25, -0.15},
                                     {0.15, 0.3, -0.25},
                                     {-0.2, -0.3, 0.15}};
  static const double freq[5][3] = {
      {0.0, 0.0, 0.0}, {3.1, 0.0, 0.0}, {2.0, -3.0, 1.0}, {4.0, 1.0, -2.0}, {0.0, 3.5, 2.5}};
  static const double phase[5] = {0.0, 0.3, -0.5, 1.1, 0.7};

  std::vector<SampledFunction> bank;
  for (int j = 0; j < 5; ++j) {
    std::vector<double> c(n), h(n), w(n);
    for (int i = 0; i < n; ++i) {
      const double mid = 0.5 * (box.lo[i] + box.hi[i]);
      const double avail = 0.5 * box.length(i) - margin;
      if (!(avail > 0.0)) throw ConfigError("test bank: margin leaves no support");
      const double off = cfrac[j][i % 3] * avail * 0.4;
      c[i] = mid + off;
      h[i] = avail - std::abs(off);
      w[i] = freq[j][i % 3];
    }
    const double ph = phase[j];
    bank.emplace_back(SampledFunction([c, h, w, ph, n](const double* y) {
      double v = 1.0;
      double arg = ph;
      for (int i = 0; i < n; ++i) {
        v *= bump_c((y[i] - c[i]) / h[i]);
        if (v == 0.0) return 0.0;
        arg += w[i] * (y[i] - c[i]);
      }
      return v * std::cos(arg);
    }));
  }
  return bank;
}

} // namespace carnot
