#include "tvlab/stencil.hpp"

#include <cmath>

namespace tvlab {

Stencil::Stencil(const SpaceTimeField& f)
    : dim(f.dim), h(f.spacing), shape(f.shape), cells(f.cell_count()) {
  stride = {0, 0, 0};
  std::size_t s = 1;
  for (int a = dim - 1; a >= 0; --a) {
    stride[a] = s;
    s *= std::size_t(shape[a]);
  }
}

std::array<int, 3> Stencil::cell_index(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = int(flat % std::size_t(shape[a]));
    flat /= std::size_t(shape[a]);
  }
  return idx;
}

std::array<double, 3> Stencil::gradient(const double* u, std::size_t c) const {
  std::array<double, 3> g{0.0, 0.0, 0.0};
  auto idx = cell_index(c);
  for (int a = 0; a < dim; ++a) {
    if (idx[a] + 1 < shape[a]) g[a] = (u[c + stride[a]] - u[c]) / h;
  }
  return g;
}

double Stencil::gradient_norm(const double* u, std::size_t c) const {
  auto g = gradient(u, c);
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += g[a] * g[a];
  return std::sqrt(s);
}

double Stencil::divergence(const std::array<const double*, 3>& comp, std::size_t c) const {
  auto idx = cell_index(c);
  double d = 0.0;
  for (int a = 0; a < dim; ++a) {
    double hi = comp[a][c];
    double lo = idx[a] > 0 ? comp[a][c - stride[a]] : 0.0;
    // the zero-past-the-edge gradient convention makes the last entry drop out
    if (idx[a] + 1 >= shape[a]) hi = 0.0;
    d += (hi - lo) / h;
  }
  return d;
}

double tv_primal_on_cells(const Stencil& st, const double* u,
                          const std::vector<std::size_t>& cells) {
  double sum = 0.0;
  for (std::size_t c : cells) sum += st.gradient_norm(u, c);
  double hN = 1.0;
  for (int a = 0; a < st.dim; ++a) hN *= st.h;
  return hN * sum;
}

}  // namespace tvlab
