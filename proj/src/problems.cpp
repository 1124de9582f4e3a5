#include "momsplit/problems.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "momsplit/types.hpp"

namespace momsplit {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require_psd(const Matrix& H) {
  if (H.rows() == 0) return;
  Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (lo < -1e-10) throw DataError("covariance is not positive semidefinite (min eigenvalue " + std::to_string(lo) + ")");
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

}  // namespace

Vector project_primal(PrimalSet set, const Vector& x) {
  switch (set) {
    case PrimalSet::kBox01:
      return project_box(x, 0.0, 1.0);
    case PrimalSet::kCappedSimplex:
      return project_capped_simplex(x);
    case PrimalSet::kNonneg:
      return project_nonneg(x);
    case PrimalSet::kFree:
      return x;
  }
  return x;
}

Resolvent primal_resolvent(PrimalSet set) {
  switch (set) {
    case PrimalSet::kBox01:
      return Resolvent::box(0.0, 1.0);
    case PrimalSet::kCappedSimplex:
      return Resolvent::capped_simplex();
    case PrimalSet::kNonneg:
      return Resolvent::nonneg();
    case PrimalSet::kFree:
      return Resolvent::zero();
  }
  return Resolvent::zero();
}

SaddleProblem make_saddle(PrimalSet set, Matrix D, Vector b, VectorMap grad_h, double beta, Vector z0) {
  if (b.size() != D.rows()) throw ArgumentError("make_saddle: b must have one entry per row of D");
  if (!(beta > 0.0)) throw ArgumentError("make_saddle: beta must be > 0");
  SaddleProblem p;
  p.primal_set = set;
  p.n = D.cols();
  p.q = D.rows();
  p.D = std::move(D);
  p.b = std::move(b);
  p.grad_h = std::move(grad_h);
  p.beta = beta;
  p.mu = operator_norm(p.D).value;
  const Index n = p.n;
  const Index q = p.q;
  if (z0.size() == 0) z0 = Vector::Zero(n + q);
  if (z0.size() != n + q) throw ArgumentError("make_saddle: z0 has the wrong dimension");
  p.z0 = std::move(z0);

  OperatorTriple& t = p.triple;
  t.dim = n + q;
  t.split = n;
  t.metric = Metric::identity(n + q);
  t.A = Resolvent::product(primal_resolvent(set), n, Resolvent::nonneg());

  const Matrix Dm = p.D;
  const Vector bm = p.b;
  t.B.eval = [Dm, bm, n, q](const Vector& z) -> Vector {
    Vector out(n + q);
    out.head(n).noalias() = Dm.transpose() * z.tail(q);
    out.tail(q).noalias() = -(Dm * z.head(n));
    out.tail(q) -= bm;
    return out;
  };
  t.B.lipschitz_mu = p.mu;

  auto gh = p.grad_h;
  t.C.eval = [gh, n, q](const Vector& z) -> Vector {
    Vector out = Vector::Zero(n + q);
    out.head(n) = gh(z.head(n));
    return out;
  };
  t.C.lipschitz_mu = beta;
  t.C.cocoercivity_beta = beta;
  return p;
}

QpProblem build_qp(Index m, Index q, std::uint64_t seed) {
  if (m < 1 || q < 1) throw ArgumentError("build_qp: m and q must be >= 1");
  const Index N = 2 * m;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));

  QpProblem out;
  QpInstance& d = out.data;
  d.seed = seed;
  d.m = m;
  d.G.resize(m, N);
  d.D.resize(q, N);
  d.b.resize(m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < N; ++j) d.G(i, j) = normal(rng) * scale;
  for (Index i = 0; i < q; ++i)
    for (Index j = 0; j < N; ++j) d.D(i, j) = normal(rng) * scale;
  for (Index i = 0; i < m; ++i) d.b[i] = normal(rng);
  Vector z0 = Vector::Zero(N + q);
  for (Index j = 0; j < N; ++j) z0[j] = unif(rng);

  const double g_norm = operator_norm(d.G).value;
  const Matrix G = d.G;
  const Vector bh = d.b;
  VectorMap grad = [G, bh](const Vector& x) { return quad_grad(G, bh, x); };
  out.saddle = make_saddle(PrimalSet::kBox01, d.D, Vector::Zero(q), std::move(grad), g_norm * g_norm, std::move(z0));
  out.saddle.objective = [G, bh](const Vector& x) { return 0.5 * (G * x - bh).squaredNorm(); };
  return out;
}

std::pair<SingleValuedOp, SingleValuedOp> split_half(const SingleValuedOp& B) {
  return {SingleValuedOp::scaled(B, 0.5), SingleValuedOp::scaled(B, 0.5)};
}

AssetData parse_or_library_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  auto next_content_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++line_no;
      if (!blank(out)) return true;
    }
    return false;
  };

  if (!next_content_line(line)) throw ParseError(line_no, "empty file");
  long n = 0;
  {
    std::istringstream ls(line);
    if (!(ls >> n) || n < 1) throw ParseError(line_no, "expected a positive asset count");
  }

  AssetData data;
  data.means.resize(n);
  Vector sigma(n);
  for (long i = 0; i < n; ++i) {
    if (!next_content_line(line)) throw ParseError(line_no, "expected " + std::to_string(n) + " mean/stddev lines");
    std::istringstream ls(line);
    double mean = 0.0;
    double sd = 0.0;
    std::string extra;
    if (!(ls >> mean >> sd) || (ls >> extra)) throw ParseError(line_no, "expected 'mean stddev'");
    if (!std::isfinite(mean) || !std::isfinite(sd) || sd < 0.0) throw ParseError(line_no, "invalid mean or stddev");
    data.means[i] = mean;
    sigma[i] = sd;
  }

  data.cov = Matrix::Zero(n, n);
  Matrix seen = Matrix::Zero(n, n);
  while (next_content_line(line)) {
    std::istringstream ls(line);
    long i = 0;
    long j = 0;
    double corr = 0.0;
    std::string extra;
    if (!(ls >> i >> j >> corr) || (ls >> extra)) throw ParseError(line_no, "expected 'i j correlation'");
    if (i < 1 || j < 1 || i > n || j > n) throw ParseError(line_no, "asset index out of range");
    if (!std::isfinite(corr)) throw ParseError(line_no, "correlation is not finite");
    if (std::abs(corr) > 1.0 + 1e-12) throw DataError("line " + std::to_string(line_no) + ": correlation outside [-1, 1]");
    const double c = corr * sigma[i - 1] * sigma[j - 1];
    data.cov(i - 1, j - 1) = c;
    data.cov(j - 1, i - 1) = c;
    seen(i - 1, j - 1) = seen(j - 1, i - 1) = 1.0;
  }
  for (long i = 0; i < n; ++i) {
    if (seen(i, i) == 0.0) data.cov(i, i) = sigma[i] * sigma[i];
  }
  require_psd(data.cov);
  return data;
}

AssetData parse_or_library(const std::filesystem::path& path) { return parse_or_library_text(read_file(path)); }

AssetData parse_csv_covariance_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> row_lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("trailing");
        row.push_back(v);
      } catch (const std::exception&) {
        throw ParseError(line_no, "not a number: '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
    row_lines.push_back(line_no);
  }
  if (rows.empty()) throw ParseError(line_no, "empty file");
  const std::size_t n = rows.front().size();
  if (rows.size() != n + 1) throw ParseError(line_no, "expected one mean row and " + std::to_string(n) + " covariance rows");
  AssetData data;
  data.means = Eigen::Map<const Vector>(rows[0].data(), static_cast<Index>(n));
  data.cov.resize(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i + 1].size() != n) throw ParseError(row_lines[i + 1], "covariance row has the wrong length");
    for (std::size_t j = 0; j < n; ++j) data.cov(i, j) = rows[i + 1][j];
  }
  data.cov = 0.5 * (data.cov + data.cov.transpose()).eval();
  require_psd(data.cov);
  return data;
}

AssetData parse_csv_covariance(const std::filesystem::path& path) {
  return parse_csv_covariance_text(read_file(path));
}

PortfolioProblem build_portfolio(const AssetData& data, double r, std::vector<Index> groups, double group_floor) {
  const Index n = data.means.size();
  if (n < 1) throw ArgumentError("build_portfolio: no assets");
  if (data.cov.rows() != n || data.cov.cols() != n) throw ArgumentError("build_portfolio: covariance shape mismatch");
  if (groups.empty()) {
    if (n % 3 != 0) throw ArgumentError("build_portfolio: supply group sizes when n is not divisible by 3");
    groups.assign(3, n / 3);
  }
  Index total = 0;
  for (Index g : groups) {
    if (g < 1) throw ArgumentError("build_portfolio: group sizes must be positive");
    total += g;
  }
  if (total != n) throw ArgumentError("build_portfolio: group sizes sum to " + std::to_string(total) + ", not n");

  const Index q = 1 + static_cast<Index>(groups.size());
  Matrix D = Matrix::Zero(q, n);
  Vector b(q);
  D.row(0) = -data.means.transpose();
  b[0] = r;
  Index start = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    D.row(static_cast<Index>(g) + 1).segment(start, groups[g]).setConstant(-1.0);
    b[static_cast<Index>(g) + 1] = group_floor;
    start += groups[g];
  }

  PortfolioProblem out;
  out.data = data;
  out.r = r;
  out.groups = groups;
  out.group_floor = group_floor;
  const Matrix H = data.cov;
  const double h_norm = operator_norm(H).value;
  Vector z0 = Vector::Zero(n + q);
  z0.head(n).setConstant(1.0 / static_cast<double>(n));
  VectorMap grad = [H](const Vector& x) -> Vector { return H * x; };
  out.saddle = make_saddle(PrimalSet::kCappedSimplex, std::move(D), std::move(b), std::move(grad), h_norm, std::move(z0));
  out.saddle.objective = [H](const Vector& x) { return objective_portfolio(H, x); };
  return out;
}

double objective_portfolio(const Matrix& H, const Vector& x) {
  if (H.rows() != x.size() || H.cols() != x.size()) throw ArgumentError("objective_portfolio: shape mismatch");
  return 0.5 * x.dot(H * x);
}

KktResiduals kkt_residuals(const SaddleProblem& p, const Vector& z) {
  if (z.size() != p.n + p.q) throw ArgumentError("kkt_residuals: dimension mismatch");
  const Vector x = z.head(p.n);
  const Vector u = z.tail(p.q);
  const Vector g = p.D * x + p.b;
  KktResiduals r;
  const Vector grad = p.grad_h(x) + p.D.transpose() * u;
  r.stationarity = (x - project_primal(p.primal_set, x - grad)).norm();
  r.complementarity = p.q ? u.cwiseProduct(g).cwiseAbs().maxCoeff() : 0.0;
  const double set_dist = (x - project_primal(p.primal_set, x)).norm();
  r.primal_infeasibility = std::max(set_dist, p.q ? std::max(0.0, g.maxCoeff()) : 0.0);
  r.dual_infeasibility = p.q ? std::max(0.0, -u.minCoeff()) : 0.0;
  return r;
}

SaddleProblem parse_custom_problem(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("invalid JSON: ") + e.what());
  }
  auto matrix = [&](const char* key) {
    const auto& rows = j.at(key);
    const Index r = static_cast<Index>(rows.size());
    const Index c = r ? static_cast<Index>(rows[0].size()) : 0;
    Matrix M(r, c);
    for (Index i = 0; i < r; ++i) {
      if (static_cast<Index>(rows[i].size()) != c) throw ParseError(0, std::string(key) + ": ragged rows");
      for (Index k = 0; k < c; ++k) M(i, k) = rows[i][k].get<double>();
    }
    return M;
  };
  auto vector = [&](const char* key) {
    const auto& a = j.at(key);
    Vector v(static_cast<Index>(a.size()));
    for (Index i = 0; i < v.size(); ++i) v[i] = a[i].get<double>();
    return v;
  };

  try {
    const std::string set_name = j.value("primal_set", std::string("box"));
    PrimalSet set;
    if (set_name == "box") {
      set = PrimalSet::kBox01;
    } else if (set_name == "capped_simplex") {
      set = PrimalSet::kCappedSimplex;
    } else if (set_name == "nonneg") {
      set = PrimalSet::kNonneg;
    } else if (set_name == "free") {
      set = PrimalSet::kFree;
    } else {
      throw ParseError(0, "unknown primal_set '" + set_name + "'");
    }

    Matrix D = matrix("D");
    Vector b = j.contains("b") ? vector("b") : Vector::Zero(D.rows());
    const Index n = D.cols();

    VectorMap grad;
    std::function<double(const Vector&)> objective;
    double beta = 0.0;
    if (j.contains("H")) {
      Matrix H = matrix("H");
      if (H.rows() != n || H.cols() != n) throw ParseError(0, "H must be n x n with n = columns of D");
      H = 0.5 * (H + H.transpose()).eval();
      require_psd(H);
      beta = operator_norm(H).value;
      grad = [H](const Vector& x) -> Vector { return H * x; };
      objective = [H](const Vector& x) { return 0.5 * x.dot(H * x); };
    } else if (j.contains("G")) {
      Matrix G = matrix("G");
      if (G.cols() != n) throw ParseError(0, "G must have n columns");
      Vector off = j.contains("h_offset") ? vector("h_offset") : Vector::Zero(G.rows());
      if (off.size() != G.rows()) throw ParseError(0, "h_offset must have one entry per row of G");
      const double s = operator_norm(G).value;
      beta = s * s;
      grad = [G, off](const Vector& x) { return quad_grad(G, off, x); };
      objective = [G, off](const Vector& x) { return 0.5 * (G * x - off).squaredNorm(); };
    } else {
      throw ParseError(0, "custom problem needs H or G");
    }
    if (!(beta > 0.0)) throw DataError("custom problem: objective has zero curvature");

    Vector z0 = Vector::Zero(n + D.rows());
    if (j.contains("x0")) {
      Vector x0 = vector("x0");
      if (x0.size() != n) throw ParseError(0, "x0 must have n entries");
      z0.head(n) = x0;
    }
    SaddleProblem p = make_saddle(set, std::move(D), std::move(b), std::move(grad), beta, std::move(z0));
    p.objective = std::move(objective);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("custom problem: ") + e.what());
  }
}

SaddleProblem load_custom_problem(const std::filesystem::path& path) { return parse_custom_problem(read_file(path)); }

}  // namespace momsplit
