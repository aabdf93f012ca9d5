#include "carnot/smooth_map.hpp"

#include <cmath>
#include <sstream>

#include "carnot/errors.hpp"
#include "carnot/homogeneous.hpp"

namespace carnot {

bool Box::contains(const double* x) const {
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

double Box::volume() const {
  double v = 1.0;
  for (int i = 0; i < dim(); ++i) v *= length(i);
  return v;
}

Box Box::cube(int n, double radius) {
  Box b;
  b.lo.assign(n, -radius);
  b.hi.assign(n, radius);
  return b;
}

Box Box::centered(const std::vector<double>& radii) {
  Box b;
  for (double r : radii) {
    b.lo.push_back(-r);
    b.hi.push_back(r);
  }
  return b;
}

std::vector<double> SmoothMap::operator()(const std::vector<double>& x) const {
  std::vector<double> out(static_cast<size_t>(dst->dim()));
  eval(x.data(), out.data());
  return out;
}

namespace {

bool heis_shaped(const Group& G) {
  if (G.dim() != 3 || G.algebra().weights() != std::vector<int>{1, 1, 2}) return false;
  const auto& t = G.algebra().basis_bracket(0, 1);
  return t.size() == 1 && t[0].k == 2 && t[0].c == 1 &&
         G.algebra().basis_bracket(0, 2).empty() && G.algebra().basis_bracket(1, 2).empty();
}

bool abelian3_shaped(const Group& G) {
  if (G.dim() != 3 || G.algebra().weights() != std::vector<int>{1, 1, 2}) return false;
  return G.algebra().basis_bracket(0, 1).empty() && G.algebra().basis_bracket(0, 2).empty() &&
         G.algebra().basis_bracket(1, 2).empty();
}

std::vector<double> parse_args(const std::string& spec, std::string& head) {
  auto open = spec.find('(');
  if (open == std::string::npos) {
    head = spec;
    return {};
  }
  if (spec.back() != ')') throw FormatError("unbalanced parentheses in map spec '" + spec + "'");
  head = spec.substr(0, open);
  std::vector<double> args;
  std::string body = spec.substr(open + 1, spec.size() - open - 2);
  std::istringstream in(body);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      size_t pos = 0;
      args.push_back(std::stod(tok, &pos));
      while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw FormatError("bad numeric argument '" + tok + "' in map spec");
    }
  }
  return args;
}

SmoothMap base_map(const Group& src, const Group& dst, const std::string& id) {
  SmoothMap m;
  m.src = &src;
  m.dst = &dst;
  m.domain = Box::cube(src.dim(), 8.0);
  m.id = id;
  return m;
}

SmoothMap make_identity(const Group& src, const Group& dst, const std::string& id, bool with_inv);

SmoothMap make_left_translation(const Group& src, const Group& dst, std::vector<double> a,
                                bool with_inv) {
  if (&src != &dst) throw ConfigError("left_translation needs src == dst");
  if (static_cast<int>(a.size()) != src.dim())
    throw ConfigError("left_translation needs one argument per coordinate");
  SmoothMap m = base_map(src, dst, "left_translation");
  const Group* G = &src;
  m.eval = [G, a](const double* y, double* out) { G->multiply(a.data(), y, out); };
  m.jac = [G, a](const double* y, Matrix& J) {
    const int n = G->dim();
    std::vector<double> xy(2 * static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) xy[i] = a[i], xy[n + i] = y[i];
    J = G->law_jacobian_y(xy.data());
  };
  m.jac_det = [](const double*) { return 1.0; };
  if (with_inv) {
    std::vector<double> ainv(a.size());
    for (size_t i = 0; i < a.size(); ++i) ainv[i] = -a[i];
    m.inv = std::make_shared<SmoothMap>(make_left_translation(src, dst, ainv, false));
    m.inv->inv = std::make_shared<SmoothMap>(make_left_translation(src, dst, a, false));
  }
  return m;
}

SmoothMap make_dilation(const Group& src, const Group& dst, double r, bool with_inv) {
  if (&src != &dst) throw ConfigError("dilation needs src == dst");
  if (!(r > 0.0)) throw ConfigError("dilation factor must be positive");
  SmoothMap m = base_map(src, dst, "dilation");
  const Group* G = &src;
  m.eval = [G, r](const double* x, double* out) { dilate(G->algebra(), r, x, out); };
  m.jac = [G, r](const double*, Matrix& J) {
    const int n = G->dim();
    J = Matrix(n, n);
    for (int i = 0; i < n; ++i) {
      double f = r;
      for (int w = 1; w < G->algebra().weight(i); ++w) f *= r;
      J(i, i) = f;
    }
  };
  m.jac_det = [G, r](const double*) { return std::pow(r, G->hom_dim()); };
  if (with_inv) {
    m.inv = std::make_shared<SmoothMap>(make_dilation(src, dst, 1.0 / r, false));
    m.inv->inv = std::make_shared<SmoothMap>(make_dilation(src, dst, r, false));
  }
  return m;
}

SmoothMap make_shear(const Group& src, const Group& dst, bool forward, bool with_inv) {
  if (!heis_shaped(src) || !heis_shaped(dst))
    throw ConfigError("contact_shear is defined on the heisenberg chart");
  SmoothMap m = base_map(src, dst, forward ? "contact_shear" : "contact_shear_inv");
  const double s = forward ? 1.0 : -1.0;
  m.eval = [s](const double* x, double* out) {
    out[0] = x[0];
    out[1] = x[1] + s * x[0] * x[0];
    out[2] = x[2] + s * x[0] * x[0] * x[0] / 6.0;
  };
  m.jac = [s](const double* x, Matrix& J) {
    J = Matrix::identity(3);
    J(1, 0) = 2.0 * s * x[0];
    J(2, 0) = 0.5 * s * x[0] * x[0];
  };
  m.jac_det = [](const double*) { return 1.0; };
  if (with_inv) {
    m.inv = std::make_shared<SmoothMap>(make_shear(src, dst, !forward, false));
    m.inv->inv = std::make_shared<SmoothMap>(make_shear(src, dst, forward, false));
  }
  return m;
}

SmoothMap make_coord_swap(const Group& src, const Group& dst, bool with_inv) {
  if (!heis_shaped(src) || !heis_shaped(dst))
    throw ConfigError("coord_swap is defined on the heisenberg chart");
  SmoothMap m = base_map(src, dst, "coord_swap");
  m.eval = [](const double* x, double* out) {
    out[0] = x[0];
    out[1] = x[2];
    out[2] = x[1];
  };
  m.jac = [](const double*, Matrix& J) {
    J = Matrix(3, 3);
    J(0, 0) = 1.0;
    J(1, 2) = 1.0;
    J(2, 1) = 1.0;
  };
  m.jac_det = [](const double*) { return -1.0; };
  if (with_inv) {
    m.inv = std::make_shared<SmoothMap>(make_coord_swap(src, dst, false));
    m.inv->inv = std::make_shared<SmoothMap>(make_coord_swap(src, dst, false));
  }
  return m;
}

SmoothMap make_identity(const Group& src, const Group& dst, const std::string& id, bool with_inv) {
  if (src.dim() != dst.dim()) throw ConfigError(id + " needs equal dimensions");
  SmoothMap m = base_map(src, dst, id);
  const int n = src.dim();
  m.eval = [n](const double* x, double* out) {
    for (int i = 0; i < n; ++i) out[i] = x[i];
  };
  m.jac = [n](const double*, Matrix& J) { J = Matrix::identity(n); };
  m.jac_det = [](const double*) { return 1.0; };
  if (with_inv) {
    m.inv = std::make_shared<SmoothMap>(make_identity(dst, src, id, false));
    m.inv->inv = std::make_shared<SmoothMap>(make_identity(src, dst, id, false));
  }
  return m;
}

} // namespace

SmoothMap make_map(const Group& src, const Group& dst, const std::string& spec) {
  std::string head;
  auto args = parse_args(spec, head);

  if (head == "identity") {
    if (!args.empty()) throw FormatError("identity takes no arguments");
    return make_identity(src, dst, "identity", true);
  }
  if (head == "left_translation") return make_left_translation(src, dst, args, true);
  if (head == "dilation") {
    if (args.size() != 1) throw FormatError("dilation takes one argument");
    return make_dilation(src, dst, args[0], true);
  }
  if (head == "contact_shear") {
    if (!args.empty()) throw FormatError("contact_shear takes no arguments");
    return make_shear(src, dst, true, true);
  }
  if (head == "coord_swap") {
    if (!args.empty()) throw FormatError("coord_swap takes no arguments");
    return make_coord_swap(src, dst, true);
  }
  if (head == "heis_to_abelian_identity") {
    if (!args.empty()) throw FormatError("heis_to_abelian_identity takes no arguments");
    if (!heis_shaped(src) || !abelian3_shaped(dst))
      throw ConfigError("heis_to_abelian_identity needs a heisenberg source and abelian(1,1,2) target");
    return make_identity(src, dst, "heis_to_abelian_identity", true);
  }
  throw FormatError("unknown map spec '" + spec + "'");
}

Matrix map_jacobian_fd(const SmoothMap& map, const double* x) {
  const int ns = map.src->dim(), nd = map.dst->dim();
  std::vector<double> xp(x, x + ns), fp(nd), fm(nd);
  Matrix J(nd, ns);
  auto column = [&](int j, double h, double* col) {
    xp[j] = x[j] + h;
    map.eval(xp.data(), fp.data());
    xp[j] = x[j] - h;
    map.eval(xp.data(), fm.data());
    xp[j] = x[j];
    for (int i = 0; i < nd; ++i) col[i] = (fp[i] - fm[i]) / (2.0 * h);
  };
  std::vector<double> c1(nd), c2(nd);
  for (int j = 0; j < ns; ++j) {
    double h = 1e-5 * (1.0 + std::fabs(x[j]));
    column(j, h, c1.data());
    column(j, 0.5 * h, c2.data());
    for (int i = 0; i < nd; ++i) J(i, j) = (4.0 * c2[i] - c1[i]) / 3.0;
  }
  return J;
}

Matrix map_jacobian(const SmoothMap& map, const double* x) {
  if (map.jac) {
    Matrix J;
    map.jac(x, J);
    return J;
  }
  return map_jacobian_fd(map, x);
}

SmoothMap compose(const SmoothMap& phi, const SmoothMap& psi) {
  if (psi.dst->dim() != phi.src->dim()) throw ConfigError("compose: dimension mismatch");
  SmoothMap m;
  m.src = psi.src;
  m.dst = phi.dst;
  m.domain = psi.domain;
  m.id = phi.id + "." + psi.id;
  auto pe = phi.eval, qe = psi.eval;
  const int mid = psi.dst->dim();
  m.eval = [pe, qe, mid](const double* x, double* out) {
    std::vector<double> t(static_cast<size_t>(mid));
    qe(x, t.data());
    pe(t.data(), out);
  };
  SmoothMap phic = phi, psic = psi;
  phic.inv.reset();
  psic.inv.reset();
  m.jac = [phic, psic, mid](const double* x, Matrix& J) {
    std::vector<double> t(static_cast<size_t>(mid));
    psic.eval(x, t.data());
    J = matmul(map_jacobian(phic, t.data()), map_jacobian(psic, x));
  };
  if (phi.jac_det && psi.jac_det) {
    auto pd = phi.jac_det, qd = psi.jac_det;
    auto qe2 = psi.eval;
    m.jac_det = [pd, qd, qe2, mid](const double* x) {
      std::vector<double> t(static_cast<size_t>(mid));
      qe2(x, t.data());
      return pd(t.data()) * qd(x);
    };
  }
  if (phi.inv && psi.inv)
    m.inv = std::make_shared<SmoothMap>(compose(*psi.inv, *phi.inv));
  return m;
}

} // namespace carnot
