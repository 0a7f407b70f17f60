#pragma once

#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "sprayg/catalog.hpp"

namespace sprayg {

// Closed-form group laws through faithful matrix representations: mu(a, b) = log(exp(A) exp(B)).
class LieGroupOracle {
 public:
  explicit LieGroupOracle(LieOracle kind, int rank) : kind_(kind), rank_(rank) {
    auto E = [](int n, int i, int j) {
      Matrix m = Matrix::Zero(n, n);
      m(i, j) = 1.0;
      return m;
    };
    switch (kind) {
      case LieOracle::so3:
        basis_ = {E(3, 2, 1) - E(3, 1, 2), E(3, 0, 2) - E(3, 2, 0), E(3, 1, 0) - E(3, 0, 1)};
        break;
      case LieOracle::heisenberg:
        basis_ = {E(3, 0, 1), E(3, 1, 2), E(3, 0, 2)};
        break;
      case LieOracle::sl2:
        basis_ = {E(2, 0, 0) - E(2, 1, 1), E(2, 0, 1), E(2, 1, 0)};
        break;
      case LieOracle::affine2:
        basis_ = {E(2, 0, 0), E(2, 0, 1)};
        break;
      case LieOracle::abelian:
        break;
      default:
        throw SchemaError("no closed-form group law for this entry");
    }
  }

  bool available() const { return kind_ != LieOracle::none && kind_ != LieOracle::tangent; }

  Matrix hat(std::span<const double> a) const {
    Matrix m = Matrix::Zero(basis_[0].rows(), basis_[0].cols());
    for (std::size_t i = 0; i < basis_.size(); ++i) m += a[i] * basis_[i];
    return m;
  }

  std::vector<double> multiply(std::span<const double> a, std::span<const double> b) const {
    if (kind_ == LieOracle::abelian) {
      std::vector<double> out(a.begin(), a.end());
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
      return out;
    }
    Matrix expA = hat(a).exp(), expB = hat(b).exp();
    Matrix L = Matrix(expA * expB).log();
    // coordinates of L in the basis, by least squares on the flattened matrices
    const Eigen::Index d = L.size();
    Matrix M(d, static_cast<Eigen::Index>(basis_.size()));
    for (std::size_t i = 0; i < basis_.size(); ++i)
      M.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Vector>(basis_[i].data(), d);
    Vector c = M.colPivHouseholderQr().solve(Eigen::Map<const Vector>(L.data(), d));
    return to_std(c);
  }

 private:
  LieOracle kind_;
  int rank_;
  std::vector<Matrix> basis_;
};

// Constant structure constants as a bilinear bracket.
class ConstantBracket {
 public:
  explicit ConstantBracket(const AlgebroidSpec& s) : r_(s.rank), c_(static_cast<std::size_t>(r_ * r_ * r_)) {
    std::vector<double> x(static_cast<std::size_t>(s.base_dim), 0.0);
    for (int g = 0; g < r_; ++g)
      for (int a = 0; a < r_; ++a)
        for (int b = 0; b < r_; ++b) c_[static_cast<std::size_t>((g * r_ + a) * r_ + b)] = s.c(g, a, b).evaluate(x);
  }

  Vector operator()(const Vector& a, const Vector& b) const {
    Vector out = Vector::Zero(r_);
    for (int g = 0; g < r_; ++g)
      for (int i = 0; i < r_; ++i)
        for (int j = 0; j < r_; ++j) out[g] += c_[static_cast<std::size_t>((g * r_ + i) * r_ + j)] * a[i] * b[j];
    return out;
  }

 private:
  int r_;
  std::vector<double> c_;
};

// Partial sums of the Dynkin series, orders 1..4.
inline std::vector<Vector> dynkin_truncations(const ConstantBracket& br, const Vector& a, const Vector& b) {
  Vector ab = br(a, b);
  std::vector<Vector> out;
  Vector z = a + b;
  out.push_back(z);
  z += 0.5 * ab;
  out.push_back(z);
  z += (br(a, ab) + br(b, br(b, a))) / 12.0;
  out.push_back(z);
  z -= br(b, br(a, ab)) / 24.0;
  out.push_back(z);
  return out;
}

struct BchRow {
  std::vector<double> a, b, spray, oracle;
  double spray_error = 0.0;
  std::vector<double> dynkin_error;  // orders 1..4 against the oracle
};

inline BchRow bch_row(const SprayModel& m, const LieGroupOracle& oracle, const ConstantBracket& br,
                      const std::vector<double>& a, const std::vector<double>& b, const SolverConfig& cfg) {
  BchRow row{a, b, {}, {}, 0.0, {}};
  row.spray = multiply(m, {{}, a}, {{}, b}, cfg).u;
  row.oracle = oracle.multiply(a, b);
  row.spray_error = dist_inf(row.spray, row.oracle);
  for (const Vector& z : dynkin_truncations(br, to_eigen(a), to_eigen(b)))
    row.dynkin_error.push_back(dist_inf(to_std(z), row.oracle));
  return row;
}

}  // namespace sprayg
