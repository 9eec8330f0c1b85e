#include "trendlab/fusion.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "trendlab/error.hpp"

namespace trendlab {

std::size_t StreamLayout::input_dim() const {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{0});
}

StreamLayout StreamLayout::standard(bool with_sentiment, std::size_t projected) {
  StreamLayout layout;
  layout.dims = with_sentiment ? std::vector<std::size_t>{3, 3, 1} : std::vector<std::size_t>{3, 3};
  layout.projected =
      projected == 0 ? *std::max_element(layout.dims.begin(), layout.dims.end()) : projected;
  return layout;
}

void StreamLayout::validate() const {
  if (dims.empty()) throw ConfigError("fusion needs at least one stream");
  if (projected == 0) throw ConfigError("projected stream width must be positive");
  for (auto d : dims)
    if (d == 0) throw ConfigError("stream widths must be positive");
}

Vector project_stream(std::span<const double> v, const Matrix& weight,
                      std::span<const double> bias) {
  if (weight.cols != v.size() || weight.rows != bias.size())
    throw std::invalid_argument("project_stream: shape mismatch (" + std::to_string(weight.rows) +
                                "x" + std::to_string(weight.cols) + " weight, " +
                                std::to_string(v.size()) + "-vector, " +
                                std::to_string(bias.size()) + "-bias)");
  Vector out(bias.begin(), bias.end());
  gemv_acc(weight, v, out);
  return out;
}

Vector fuse(std::span<const Vector> parts) {
  if (parts.empty()) throw std::invalid_argument("fuse: no streams");
  const std::size_t width = parts.front().size();
  Vector out;
  out.reserve(width * parts.size());
  for (const auto& p : parts) {
    if (p.size() != width) throw std::invalid_argument("fuse: stream dimension mismatch");
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

Vector fuse(const Vector& x, const Vector& y, const Vector& z) {
  const Vector parts[] = {x, y, z};
  return fuse(parts);
}

Vector fuse_row(std::span<const double> row, const StreamLayout& layout,
                const FusionParameters& params) {
  if (row.size() != layout.input_dim() || params.streams.size() != layout.dims.size())
    throw std::invalid_argument("fuse_row: input does not match the stream layout");
  Vector out(layout.fused_dim());
  std::size_t offset = 0;
  for (std::size_t s = 0; s < layout.dims.size(); ++s) {
    const auto& p = params.streams[s];
    std::span<double> dst(out.data() + s * layout.projected, layout.projected);
    std::copy(p.bias.begin(), p.bias.end(), dst.begin());
    gemv_acc(p.weight, row.subspan(offset, layout.dims[s]), dst);
    offset += layout.dims[s];
  }
  return out;
}

}  // namespace trendlab
