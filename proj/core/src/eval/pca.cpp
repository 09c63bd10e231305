#include "whinpjf/eval/pca.hpp"

#include <fmt/format.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "whinpjf/common/binary.hpp"
#include "whinpjf/common/error.hpp"

namespace whinpjf::eval {

Projection pca_2d(const ad::Matrix<double>& rows, std::vector<std::uint32_t> ids) {
  const auto n = rows.rows(), d = rows.cols();
  if (n < 3) throw DegenerateError(fmt::format("pca needs at least 3 vectors, got {}", n));
  if (ids.size() != n) throw DimensionError("pca: one id per row required");
  Eigen::MatrixXd x(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) x(r, c) = rows(r, c);
  }
  const double scale = std::max(1.0, x.squaredNorm() / static_cast<double>(n));
  x.rowwise() -= x.colwise().mean();
  const Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(n - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw NumericError("pca: eigen-solve failed");
  // Eigen sorts ascending.
  const Eigen::VectorXd values = es.eigenvalues().reverse();
  if (d == 0 || values(0) <= 1e-12 * scale) throw DegenerateError("pca: data has rank 0");

  Projection p;
  p.ids = std::move(ids);
  p.coords = ad::Matrix<double>(n, 2);
  for (Eigen::Index k = 0; k < values.size(); ++k) p.variances.push_back(std::max(values(k), 0.0));
  for (std::size_t k = 0; k < 2; ++k) {
    if (k >= d) break;
    Eigen::VectorXd v = es.eigenvectors().col(static_cast<Eigen::Index>(d - 1 - k));
    Eigen::VectorXd proj = x * v;
    Eigen::Index arg = 0;
    proj.cwiseAbs().maxCoeff(&arg);
    if (proj(arg) < 0) {
      v = -v;
      proj = -proj;
    }
    p.components[k].assign(v.data(), v.data() + v.size());
    for (std::size_t r = 0; r < n; ++r) p.coords(r, k) = proj(static_cast<Eigen::Index>(r));
  }
  return p;
}

Projection pca_export(const pretrain::EmbeddingTable& table, graph::EntityKind kind,
                      std::span<const std::uint32_t> ids, const std::filesystem::path& csv,
                      const std::optional<std::filesystem::path>& svg, std::span<const std::uint32_t> labels) {
  const auto& src = table.kind(kind);
  std::vector<std::uint32_t> chosen(ids.begin(), ids.end());
  if (chosen.empty()) {
    for (std::uint32_t i = 0; i < src.rows(); ++i) chosen.push_back(i);
  }
  ad::Matrix<double> rows(chosen.size(), src.cols());
  for (std::size_t r = 0; r < chosen.size(); ++r) {
    if (chosen[r] >= src.rows()) throw ContractError(fmt::format("pca: id {} out of range", chosen[r]));
    for (std::size_t c = 0; c < src.cols(); ++c) rows(r, c) = src(chosen[r], c);
  }
  auto p = pca_2d(rows, chosen);
  std::string text = "id,x,y\n";
  for (std::size_t r = 0; r < p.ids.size(); ++r) {
    text += fmt::format("{},{:.9g},{:.9g}\n", p.ids[r], p.coords(r, 0), p.coords(r, 1));
  }
  if (csv.has_parent_path()) std::filesystem::create_directories(csv.parent_path());
  binary::write_text(csv, text);
  if (svg) {
    std::vector<std::uint32_t> picked;
    if (!labels.empty()) {
      for (auto id : p.ids) {
        if (id >= labels.size()) throw DimensionError("pca: label list shorter than the table");
        picked.push_back(labels[id]);
      }
    }
    write_svg(p, picked, *svg);
  }
  return p;
}

void write_svg(const Projection& p, std::span<const std::uint32_t> labels, const std::filesystem::path& path) {
  static constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                             "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  constexpr double kSize = 600, kMargin = 30;
  double lo_x = std::numeric_limits<double>::infinity(), hi_x = -lo_x, lo_y = lo_x, hi_y = -lo_x;
  for (std::size_t r = 0; r < p.coords.rows(); ++r) {
    lo_x = std::min(lo_x, p.coords(r, 0));
    hi_x = std::max(hi_x, p.coords(r, 0));
    lo_y = std::min(lo_y, p.coords(r, 1));
    hi_y = std::max(hi_y, p.coords(r, 1));
  }
  const double sx = (kSize - 2 * kMargin) / std::max(hi_x - lo_x, 1e-12);
  const double sy = (kSize - 2 * kMargin) / std::max(hi_y - lo_y, 1e-12);
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      kSize);
  for (std::size_t r = 0; r < p.coords.rows(); ++r) {
    const double x = kMargin + (p.coords(r, 0) - lo_x) * sx;
    const double y = kSize - kMargin - (p.coords(r, 1) - lo_y) * sy;
    const char* color = labels.empty() ? kPalette[0] : kPalette[labels[r] % std::size(kPalette)];
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"{}\"><title>{}</title></circle>\n", x, y,
                       color, p.ids[r]);
  }
  out += "</svg>\n";
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  binary::write_text(path, out);
}

double silhouette(const ad::Matrix<double>& points, std::span<const std::uint32_t> labels) {
  const auto n = points.rows();
  if (labels.size() != n) throw DimensionError("silhouette: one label per point required");
  if (n == 0) throw EmptyInputError("silhouette: no points");
  const auto k = static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
  std::vector<std::size_t> size(k, 0);
  for (auto l : labels) ++size[l];
  if (std::count_if(size.begin(), size.end(), [](std::size_t s) { return s > 0; }) < 2) {
    throw DegenerateError("silhouette needs at least two clusters");
  }
  double total = 0;
  std::vector<double> sum(k);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(sum.begin(), sum.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double d2 = 0;
      for (std::size_t c = 0; c < points.cols(); ++c) {
        const double t = points(i, c) - points(j, c);
        d2 += t * t;
      }
      sum[labels[j]] += std::sqrt(d2);
    }
    const auto own = labels[i];
    if (size[own] < 2) continue;
    const double a = sum[own] / static_cast<double>(size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own && size[c] > 0) b = std::min(b, sum[c] / static_cast<double>(size[c]));
    }
    const double m = std::max(a, b);
    if (m > 0) total += (b - a) / m;
  }
  return total / static_cast<double>(n);
}

}  // namespace whinpjf::eval
