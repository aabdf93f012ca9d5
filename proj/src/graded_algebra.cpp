#include "carnot/graded_algebra.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "carnot/errors.hpp"

namespace carnot {

GradedLieAlgebra::GradedLieAlgebra(int n, int step, std::vector<int> weights, std::string name)
    : m_n(n), m_step(step), m_weights(std::move(weights)), m_name(std::move(name)) {
  if (n < 1) throw FormatError("dimension must be positive");
  if (step < 1) throw FormatError("step must be positive");
  if (static_cast<int>(m_weights.size()) != n) throw FormatError("weight count != dimension");
  m_table.resize(static_cast<size_t>(n) * (n - 1) / 2);
}

int GradedLieAlgebra::hom_dim() const {
  int q = 0;
  for (int w : m_weights) q += w;
  return q;
}

void GradedLieAlgebra::set_bracket(int i, int j, int k, const Rational& c) {
  if (i < 0 || j < 0 || k < 0 || i >= m_n || j >= m_n || k >= m_n)
    throw FormatError("bracket index out of range");
  if (i >= j) throw FormatError("bracket triples must have i < j");
  auto& terms = m_table[pair_index(i, j)];
  for (const auto& t : terms)
    if (t.k == k) throw FormatError("duplicate bracket entry");
  if (c != 0) terms.push_back({k, c});
}

const std::vector<BracketTerm>& GradedLieAlgebra::basis_bracket(int i, int j) const {
  return m_table[pair_index(i, j)];
}

std::vector<double> GradedLieAlgebra::bracket(const std::vector<double>& X,
                                              const std::vector<double>& Y) const {
  return bracket(X, Y, 0.0);
}

std::vector<Rational> GradedLieAlgebra::bracket(const std::vector<Rational>& X,
                                                const std::vector<Rational>& Y) const {
  return bracket(X, Y, Rational(0));
}

std::string ValidationReport::to_string() const {
  if (valid()) return "valid\n";
  std::ostringstream out;
  for (const auto& v : violations) out << v.kind << ": " << v.message << "\n";
  return out.str();
}

ValidationReport validate_algebra(const GradedLieAlgebra& A) {
  ValidationReport rep;
  const int n = A.dim();

  for (int i = 0; i + 1 < n; ++i)
    if (A.weight(i) > A.weight(i + 1)) {
      std::ostringstream m;
      m << "weights not nondecreasing at positions " << i + 1 << "," << i + 2;
      rep.violations.push_back({"weights", {i + 1, i + 2, -1}, m.str()});
    }
  for (int i = 0; i < n; ++i)
    if (A.weight(i) < 1)
      rep.violations.push_back({"weights", {i + 1, -1, -1}, "weight must be >= 1"});

  int wmax = 0;
  for (int i = 0; i < n; ++i) wmax = std::max(wmax, A.weight(i));
  if (A.step() != wmax) {
    std::ostringstream m;
    m << "declared step " << A.step() << " != max weight " << wmax;
    rep.violations.push_back({"step", {-1, -1, -1}, m.str()});
  }

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (const auto& t : A.basis_bracket(i, j)) {
        if (t.c == 0) continue;
        if (A.weight(t.k) != A.weight(i) + A.weight(j)) {
          std::ostringstream m;
          m << "c(" << i + 1 << "," << j + 1 << ")^" << t.k + 1 << " nonzero but weight "
            << A.weight(t.k) << " != " << A.weight(i) << "+" << A.weight(j);
          rep.violations.push_back({"grading", {i + 1, j + 1, t.k + 1}, m.str()});
        }
      }

  // Jacobi on basis triples, exact.
  auto unit = [&](int i) {
    std::vector<Rational> e(n, Rational(0));
    e[i] = 1;
    return e;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        auto ei = unit(i), ej = unit(j), ek = unit(k);
        auto s = A.bracket(A.bracket(ei, ej), ek);
        auto t2 = A.bracket(A.bracket(ej, ek), ei);
        auto t3 = A.bracket(A.bracket(ek, ei), ej);
        bool zero = true;
        for (int m = 0; m < n; ++m)
          if (s[m] + t2[m] + t3[m] != 0) zero = false;
        if (!zero) {
          std::ostringstream m;
          m << "Jacobi fails on (e" << i + 1 << ",e" << j + 1 << ",e" << k + 1 << ")";
          rep.violations.push_back({"jacobi", {i + 1, j + 1, k + 1}, m.str()});
        }
      }
  return rep;
}

namespace {

std::vector<std::string> split_args(const std::string& id, std::string& head) {
  auto open = id.find('(');
  if (open == std::string::npos) {
    head = id;
    return {};
  }
  if (id.back() != ')') throw FormatError("unbalanced parentheses in '" + id + "'");
  head = id.substr(0, open);
  std::vector<std::string> args;
  std::string body = id.substr(open + 1, id.size() - open - 2);
  std::istringstream in(body);
  std::string tok;
  while (std::getline(in, tok, ',')) args.push_back(tok);
  return args;
}

long arg_long(const std::string& s) {
  try {
    size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError("bad integer argument '" + s + "'");
  }
}

} // namespace

GradedLieAlgebra builtin_algebra(const std::string& id) {
  std::string head;
  auto args = split_args(id, head);

  if (head == "heisenberg") {
    long d = 1;
    if (args.size() == 1)
      d = arg_long(args[0]);
    else if (!args.empty())
      throw FormatError("heisenberg takes at most one argument");
    if (d < 1) throw FormatError("heisenberg(d) needs d >= 1");
    int n = static_cast<int>(2 * d + 1);
    std::vector<int> w(n, 1);
    w[n - 1] = 2;
    GradedLieAlgebra A(n, 2, w, id);
    for (long i = 0; i < d; ++i) A.set_bracket(static_cast<int>(i), static_cast<int>(d + i), n - 1, Rational(1));
    return A;
  }

  if (head == "engel") {
    if (!args.empty()) throw FormatError("engel takes no arguments");
    GradedLieAlgebra A(4, 3, {1, 1, 2, 3}, "engel");
    A.set_bracket(0, 1, 2, Rational(1));
    A.set_bracket(0, 2, 3, Rational(1));
    return A;
  }

  if (head == "free_nilpotent") {
    if (args.size() != 2 || arg_long(args[0]) != 2 || arg_long(args[1]) != 3)
      throw FormatError("only free_nilpotent(2,3) is built in");
    GradedLieAlgebra A(5, 3, {1, 1, 2, 3, 3}, "free_nilpotent(2,3)");
    A.set_bracket(0, 1, 2, Rational(1));
    A.set_bracket(0, 2, 3, Rational(1));
    A.set_bracket(1, 2, 4, Rational(1));
    return A;
  }

  if (head == "abelian") {
    if (args.empty()) throw FormatError("abelian needs a dimension or weight list");
    std::vector<int> w;
    if (args.size() == 1) {
      long n = arg_long(args[0]);
      if (n < 1) throw FormatError("abelian(n) needs n >= 1");
      w.assign(static_cast<size_t>(n), 1);
    } else {
      for (const auto& a : args) {
        long v = arg_long(a);
        if (v < 1) throw FormatError("abelian weights must be >= 1");
        w.push_back(static_cast<int>(v));
      }
    }
    int step = *std::max_element(w.begin(), w.end());
    return GradedLieAlgebra(static_cast<int>(w.size()), step, w, id);
  }

  throw FormatError("unknown builtin group '" + id + "'");
}

GradedLieAlgebra read_algebra(std::istream& in, const std::string& name) {
  std::vector<std::string> lines;
  std::string raw;
  while (std::getline(in, raw)) {
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream probe(raw);
    std::string tok;
    if (probe >> tok) lines.push_back(raw);
  }
  if (lines.size() < 2) throw FormatError("group file needs a header and a weight line");

  std::istringstream head(lines[0]);
  long n = 0, step = 0;
  if (!(head >> n >> step)) throw FormatError("bad header line (want: n step)");
  std::string extra;
  if (head >> extra) throw FormatError("trailing tokens on header line");
  if (n < 1 || step < 1) throw FormatError("n and step must be positive");

  std::istringstream wline(lines[1]);
  std::vector<int> w;
  long v;
  while (wline >> v) w.push_back(static_cast<int>(v));
  if (static_cast<long>(w.size()) != n) throw FormatError("weight line must list n weights");

  GradedLieAlgebra A(static_cast<int>(n), static_cast<int>(step), w, name);
  for (size_t li = 2; li < lines.size(); ++li) {
    std::istringstream t(lines[li]);
    long i, j, k;
    std::string c;
    if (!(t >> i >> j >> k >> c)) throw FormatError("bad bracket line: '" + lines[li] + "'");
    if (t >> extra) throw FormatError("trailing tokens on bracket line: '" + lines[li] + "'");
    if (i < 1 || j < 1 || k < 1 || i > n || j > n || k > n)
      throw FormatError("bracket indices out of range on line: '" + lines[li] + "'");
    A.set_bracket(static_cast<int>(i - 1), static_cast<int>(j - 1), static_cast<int>(k - 1),
                  parse_rational(c));
  }
  return A;
}

GradedLieAlgebra read_algebra_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open group file '" + path + "'");
  return read_algebra(in, path);
}

void write_algebra(std::ostream& out, const GradedLieAlgebra& A) {
  out << A.dim() << " " << A.step() << "\n";
  for (int i = 0; i < A.dim(); ++i) out << (i ? " " : "") << A.weight(i);
  out << "\n";
  for (int i = 0; i < A.dim(); ++i)
    for (int j = i + 1; j < A.dim(); ++j)
      for (const auto& t : A.basis_bracket(i, j))
        out << i + 1 << " " << j + 1 << " " << t.k + 1 << " " << rational_str(t.c) << "\n";
}

} // namespace carnot
