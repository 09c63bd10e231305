#include "whinpjf/autodiff/matrix.hpp"

namespace whinpjf::ad {

template <typename T>
void gemm_nn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out, bool accumulate) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (!accumulate) out.fill(T(0));
  for (std::size_t i = 0; i < m; ++i) {
    T* __restrict o = out.data() + i * n;
    const T* __restrict arow = a.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      if (av == T(0)) continue;
      const T* __restrict brow = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += av * brow[j];
    }
  }
}

template <typename T>
void gemm_nt(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out, bool accumulate) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  for (std::size_t i = 0; i < m; ++i) {
    const T* __restrict arow = a.data() + i * k;
    T* __restrict o = out.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const T* __restrict brow = b.data() + j * k;
      T acc = T(0);
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      o[j] = accumulate ? o[j] + acc : acc;
    }
  }
}

template <typename T>
void gemm_tn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out, bool accumulate) {
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  if (!accumulate) out.fill(T(0));
  for (std::size_t p = 0; p < k; ++p) {
    const T* __restrict arow = a.data() + p * m;
    const T* __restrict brow = b.data() + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const T av = arow[i];
      if (av == T(0)) continue;
      T* __restrict o = out.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += av * brow[j];
    }
  }
}

template void gemm_nn<float>(const Matrix<float>&, const Matrix<float>&, Matrix<float>&, bool);
template void gemm_nn<double>(const Matrix<double>&, const Matrix<double>&, Matrix<double>&, bool);
template void gemm_nt<float>(const Matrix<float>&, const Matrix<float>&, Matrix<float>&, bool);
template void gemm_nt<double>(const Matrix<double>&, const Matrix<double>&, Matrix<double>&, bool);
template void gemm_tn<float>(const Matrix<float>&, const Matrix<float>&, Matrix<float>&, bool);
template void gemm_tn<double>(const Matrix<double>&, const Matrix<double>&, Matrix<double>&, bool);

}  // namespace whinpjf::ad
