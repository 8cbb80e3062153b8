#include "brz/tensor.hpp"

#include <algorithm>
#include <stdexcept>

#include "parallel.hpp"

namespace brz {

namespace {

// Column chunk for the leading axis; fixed so results do not depend on the
// number of threads.
constexpr std::size_t kChunk = 512;

}  // namespace

std::vector<double> mode_product(const std::vector<double>& in, const Shape& shape, int axis,
                                 const Eigen::MatrixXd& M) {
  const std::size_t a = static_cast<std::size_t>(axis);
  if (a >= shape.size()) throw std::invalid_argument("mode_product: axis out of range");
  const std::size_t n = shape[a];
  if (static_cast<std::size_t>(M.cols()) != n) {
    throw std::invalid_argument("mode_product: matrix does not match axis length");
  }
  std::size_t pre = 1, post = 1;
  for (std::size_t j = 0; j < a; ++j) pre *= shape[j];
  for (std::size_t j = a + 1; j < shape.size(); ++j) post *= shape[j];
  if (in.size() != pre * n * post) throw std::invalid_argument("mode_product: size mismatch");
  const std::size_t m = static_cast<std::size_t>(M.rows());
  std::vector<double> out(pre * m * post);

  using ConstMap = Eigen::Map<const Eigen::MatrixXd, 0, Eigen::OuterStride<>>;
  using Map = Eigen::Map<Eigen::MatrixXd, 0, Eigen::OuterStride<>>;
  const Eigen::MatrixXd Mt = M.transpose();
  // Each (n x post) row-major slab is a (post x n) column-major matrix.
  const std::size_t chunks = (post + kChunk - 1) / kChunk;
  detail::parallel_for(pre * chunks, [&](std::size_t task) {
    const std::size_t b = task / chunks;
    const std::size_t c0 = (task % chunks) * kChunk;
    const std::size_t cols = std::min(kChunk, post - c0);
    ConstMap src(in.data() + b * n * post + c0, static_cast<Eigen::Index>(cols),
                 static_cast<Eigen::Index>(n), Eigen::OuterStride<>(static_cast<Eigen::Index>(post)));
    Map dst(out.data() + b * m * post + c0, static_cast<Eigen::Index>(cols),
            static_cast<Eigen::Index>(m), Eigen::OuterStride<>(static_cast<Eigen::Index>(post)));
    dst.noalias() = src * Mt;
  });
  return out;
}

std::vector<double> apply_per_axis(std::vector<double> values, Shape& shape,
                                   const std::vector<Eigen::MatrixXd>& mats) {
  if (mats.size() != shape.size()) throw std::invalid_argument("apply_per_axis: one matrix per axis");
  for (std::size_t j = 0; j < mats.size(); ++j) {
    values = mode_product(values, shape, static_cast<int>(j), mats[j]);
    shape[j] = static_cast<std::size_t>(mats[j].rows());
  }
  return values;
}

}  // namespace brz
