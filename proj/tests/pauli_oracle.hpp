#pragma once

// Brute-force Hamiltonians from Kronecker products of Pauli matrices, used as
// an independent check of the bit-pattern operator builders.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using CMatrix = Eigen::MatrixXcd;
using cd = std::complex<double>;

inline CMatrix pauli(char axis) {
  CMatrix m(2, 2);
  switch (axis) {
    case 'x': m << 0, 1, 1, 0; break;
    case 'y': m << 0, cd(0, -1), cd(0, 1), 0; break;
    case 'z': m << 1, 0, 0, -1; break;
    default: m.setIdentity();
  }
  return m;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Site s (1-based) is bit s-1, so site 1 is the rightmost Kronecker factor.
inline CMatrix site_op(int n, int site, char axis) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (int s = n; s >= 1; --s) out = kron(out, s == site ? pauli(axis) : pauli('1'));
  return out;
}

struct Model {
  int n;
  std::vector<double> bonds;  // J_i between sites i, i+1
  double delta = 0.0;
  double b_z = 0.0;
  double k_dip = 0.0;
};

inline CMatrix hamiltonian(const Model& m) {
  const Eigen::Index dim = Eigen::Index(1) << m.n;
  CMatrix h = CMatrix::Zero(dim, dim);
  for (int i = 1; i < m.n; ++i) {
    const double j = m.bonds[i - 1];
    h -= 0.25 * j *
         (site_op(m.n, i, 'x') * site_op(m.n, i + 1, 'x') +
          site_op(m.n, i, 'y') * site_op(m.n, i + 1, 'y') +
          m.delta * site_op(m.n, i, 'z') * site_op(m.n, i + 1, 'z'));
  }
  for (int s = 1; s <= m.n; ++s) h += 0.5 * m.b_z * site_op(m.n, s, 'z');
  if (m.k_dip > 0.0)
    for (int a = 1; a <= m.n; ++a)
      for (int b = a + 1; b <= m.n; ++b) {
        const double r = b - a;
        const double k = m.k_dip / (r * r * r);
        CMatrix dot = site_op(m.n, a, 'x') * site_op(m.n, b, 'x') +
                      site_op(m.n, a, 'y') * site_op(m.n, b, 'y') +
                      site_op(m.n, a, 'z') * site_op(m.n, b, 'z');
        h += 0.25 * k * (dot - 3.0 * site_op(m.n, a, 'y') * site_op(m.n, b, 'y'));
      }
  return h;
}

}  // namespace oracle
