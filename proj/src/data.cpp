#include "hesslasso/data.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_map>

namespace hesslasso {

namespace {

bool is_constant(double sd, double mean) {
  return !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
}

std::size_t hash_combine(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

IndexSet true_support(Index p, Index s) {
  if (s > p) throw Error("true_support: s exceeds p");
  IndexSet out;
  out.reserve(static_cast<std::size_t>(s));
  for (Index j = 0; j < s; ++j) out.push_back(j * p / s);
  return out;
}

SimData simulate(const SimSpec& spec) {
  if (spec.n < 1 || spec.p < 1) throw Error("simulate: n and p must be positive");
  if (spec.s < 0 || spec.s > spec.p) throw Error("simulate: s must lie in [0, p]");
  if (!(spec.rho >= 0.0 && spec.rho < 1.0)) throw Error("simulate: rho must lie in [0, 1)");

  const Index n = spec.n;
  const Index p = spec.p;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Sigma^{1/2} = a I + b 11^T
  const double a = std::sqrt(1.0 - spec.rho);
  const double b = (std::sqrt(1.0 - spec.rho + static_cast<double>(p) * spec.rho) - a) /
                   static_cast<double>(p);

  SimData out;
  out.x.resize(n, p);
  Vector z(p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) z[j] = normal(rng);
    const double shift = b * z.sum();
    out.x.row(i) = (a * z.array() + shift).matrix().transpose();
  }

  out.beta_true = Vector::Zero(p);
  for (Index j : true_support(p, spec.s)) out.beta_true[j] = 1.0;

  const Vector eta = out.x * out.beta_true;
  out.y.resize(n);
  switch (spec.response) {
    case LossKind::least_squares: {
      const double s = static_cast<double>(spec.s);
      const double signal = (1.0 - spec.rho) * s + spec.rho * s * s;
      const double sigma = std::isinf(spec.snr) ? 0.0 : std::sqrt(signal / spec.snr);
      for (Index i = 0; i < n; ++i) out.y[i] = eta[i] + sigma * normal(rng);
      break;
    }
    case LossKind::logistic:
      for (Index i = 0; i < n; ++i) {
        std::bernoulli_distribution draw(1.0 / (1.0 + std::exp(-eta[i])));
        out.y[i] = draw(rng) ? 1.0 : 0.0;
      }
      break;
    case LossKind::poisson:
      for (Index i = 0; i < n; ++i) {
        std::poisson_distribution<long long> draw(std::exp(eta[i]));
        out.y[i] = static_cast<double>(draw(rng));
      }
      break;
  }
  return out;
}

StandardizedData standardize(const Matrix& x, const Vector& y, LossKind kind) {
  if (x.rows() < 2) throw Error("standardize: need at least two observations");
  if (x.rows() != y.size()) throw Error("standardize: X and y have different numbers of rows");
  const double n = static_cast<double>(x.rows());
  StandardizedData out;
  out.centers = x.colwise().mean().transpose();
  out.scales.resize(x.cols());
  Matrix xs = x.rowwise() - out.centers.transpose();
  for (Index j = 0; j < x.cols(); ++j) {
    const double sd = std::sqrt(xs.col(j).squaredNorm() / n);
    if (is_constant(sd, out.centers[j])) {
      out.scales[j] = 1.0;
      out.constant_columns.push_back(j);
      xs.col(j).setZero();
    } else {
      out.scales[j] = sd;
      xs.col(j) /= sd;
    }
  }
  out.x = Design(std::move(xs));
  out.y = y;
  if (kind == LossKind::least_squares) {
    out.y_center = y.mean();
    out.y.array() -= out.y_center;
  }
  return out;
}

StandardizedData standardize(const SparseMatrix& x, const Vector& y, LossKind kind) {
  if (x.rows() < 2) throw Error("standardize: need at least two observations");
  if (x.rows() != y.size()) throw Error("standardize: X and y have different numbers of rows");
  const double n = static_cast<double>(x.rows());
  StandardizedData out;
  out.centers.resize(x.cols());
  out.scales.resize(x.cols());
  SparseMatrix xm = x;
  xm.makeCompressed();
  for (Index j = 0; j < x.cols(); ++j) {
    double s = 0.0;
    double s2 = 0.0;
    for (SparseMatrix::InnerIterator it(xm, j); it; ++it) {
      s += it.value();
      s2 += it.value() * it.value();
    }
    const double mean = s / n;
    const double sd = std::sqrt(std::max(0.0, s2 / n - mean * mean));
    out.centers[j] = mean;
    if (is_constant(sd, mean)) {
      out.scales[j] = 1.0;
      out.constant_columns.push_back(j);
      // A constant column is identical to its center; clear it so it stays zero.
      for (SparseMatrix::InnerIterator it(xm, j); it; ++it) it.valueRef() = 0.0;
      out.centers[j] = 0.0;
    } else {
      out.scales[j] = sd;
    }
  }
  xm.prune(0.0);
  out.x = Design(std::move(xm), out.centers, out.scales);
  out.y = y;
  if (kind == LossKind::least_squares) {
    out.y_center = y.mean();
    out.y.array() -= out.y_center;
  }
  return out;
}

LibsvmData parse_libsvm(std::istream& in, bool binary_labels) {
  using Triplet = Eigen::Triplet<double, int>;
  std::vector<Triplet> triplets;
  std::vector<double> labels;
  long long max_index = 0;

  std::string line;
  long long line_no = 0;
  auto fail = [&](const std::string& what) -> Error {
    return Error("libsvm line " + std::to_string(line_no) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    double label = 0.0;
    try {
      std::size_t used = 0;
      label = std::stod(token, &used);
      if (used != token.size()) throw fail("malformed label '" + token + "'");
    } catch (const std::invalid_argument&) {
      throw fail("malformed label '" + token + "'");
    } catch (const std::out_of_range&) {
      throw fail("label out of range");
    }
    if (binary_labels) {
      if (label == -1.0) label = 0.0;
      else if (label == 1.0 || label == 0.0) {
      } else {
        throw fail("label " + token + " is not binary");
      }
    }
    const int row = static_cast<int>(labels.size());
    labels.push_back(label);

    long long previous = 0;
    while (fields >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == token.size()) {
        throw fail("malformed entry '" + token + "'");
      }
      long long index = 0;
      double value = 0.0;
      try {
        std::size_t used = 0;
        index = std::stoll(token.substr(0, colon), &used);
        if (used != colon) throw fail("malformed index in '" + token + "'");
        const std::string v = token.substr(colon + 1);
        value = std::stod(v, &used);
        if (used != v.size()) throw fail("malformed value in '" + token + "'");
      } catch (const std::invalid_argument&) {
        throw fail("malformed entry '" + token + "'");
      } catch (const std::out_of_range&) {
        throw fail("entry out of range '" + token + "'");
      }
      if (index < 1) throw fail("indices are 1-based");
      if (index <= previous) throw fail("indices must be strictly increasing");
      previous = index;
      max_index = std::max(max_index, index);
      triplets.emplace_back(row, static_cast<int>(index - 1), value);
    }
  }
  if (labels.empty()) throw Error("libsvm: no rows");

  LibsvmData out;
  out.x.resize(static_cast<Index>(labels.size()), static_cast<Index>(max_index));
  out.x.setFromTriplets(triplets.begin(), triplets.end());
  out.x.makeCompressed();
  out.y = Eigen::Map<const Vector>(labels.data(), static_cast<Index>(labels.size()));
  return out;
}

LibsvmData load_libsvm(const std::string& path, bool binary_labels) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return parse_libsvm(in, binary_labels);
}

void write_libsvm(std::ostream& out, const SparseMatrix& x, const Vector& y) {
  if (x.rows() != y.size()) throw Error("write_libsvm: X and y have different numbers of rows");
  const Eigen::SparseMatrix<double, Eigen::RowMajor, int> rows = x;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Index i = 0; i < rows.rows(); ++i) {
    out << y[i];
    for (Eigen::SparseMatrix<double, Eigen::RowMajor, int>::InnerIterator it(rows, i); it; ++it) {
      out << ' ' << (it.index() + 1) << ':' << it.value();
    }
    out << '\n';
  }
}

std::vector<std::pair<Index, Index>> duplicate_columns(const SparseMatrix& x) {
  std::unordered_multimap<std::size_t, Index> seen;
  std::vector<std::pair<Index, Index>> out;
  auto same = [&](Index a, Index b) {
    SparseMatrix::InnerIterator ia(x, a);
    SparseMatrix::InnerIterator ib(x, b);
    for (; ia && ib; ++ia, ++ib) {
      if (ia.index() != ib.index() || ia.value() != ib.value()) return false;
    }
    return !ia && !ib;
  };
  for (Index j = 0; j < x.cols(); ++j) {
    std::size_t h = 0;
    for (SparseMatrix::InnerIterator it(x, j); it; ++it) {
      h = hash_combine(h, std::hash<Index>{}(it.index()));
      h = hash_combine(h, std::hash<double>{}(it.value()));
    }
    bool duplicate = false;
    auto range = seen.equal_range(h);
    for (auto it = range.first; it != range.second; ++it) {
      if (same(it->second, j)) {
        out.emplace_back(it->second, j);
        duplicate = true;
        break;
      }
    }
    if (!duplicate) seen.emplace(h, j);
  }
  return out;
}

std::vector<std::pair<Index, Index>> duplicate_columns(const Matrix& x) {
  SparseMatrix s = x.sparseView(0.0, 0.0);
  return duplicate_columns(s);
}

SparseMatrix drop_columns(const SparseMatrix& x, const IndexSet& columns) {
  std::vector<bool> drop(static_cast<std::size_t>(x.cols()), false);
  for (Index j : columns) drop[j] = true;
  std::vector<Eigen::Triplet<double, int>> triplets;
  int out_col = 0;
  for (Index j = 0; j < x.cols(); ++j) {
    if (drop[j]) continue;
    for (SparseMatrix::InnerIterator it(x, j); it; ++it) {
      triplets.emplace_back(static_cast<int>(it.index()), out_col, it.value());
    }
    ++out_col;
  }
  SparseMatrix out(x.rows(), out_col);
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

Matrix drop_columns(const Matrix& x, const IndexSet& columns) {
  std::vector<bool> drop(static_cast<std::size_t>(x.cols()), false);
  for (Index j : columns) drop[j] = true;
  std::vector<Index> keep;
  for (Index j = 0; j < x.cols(); ++j) {
    if (!drop[j]) keep.push_back(j);
  }
  return x(Eigen::all, keep);
}

}  // namespace hesslasso
