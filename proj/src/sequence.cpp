#include "skelet/sequence.hpp"

namespace skelet {

SkeletonSequence::SkeletonSequence(Tensor d, std::string layout, std::optional<std::int32_t> lbl)
    : data(std::move(d)), layout_id(std::move(layout)), label(lbl) {
  validate();
}

Tensor SkeletonSequence::person(Index i) const {
  if (i < 0 || i >= persons()) throw IndexError("person " + std::to_string(i) + " out of range");
  const Index per = joints() * frames() * channels();
  return Tensor({joints(), frames(), channels()}, data.flat().segment(i * per, per));
}

void SkeletonSequence::validate() const {
  if (data.rank() != 4) {
    throw DimensionError("skeleton sequence must be (I, J, T, C), got " + shape_string(data.shape()));
  }
  if (channels() < 2 || channels() > 3) {
    throw DimensionError("skeleton sequence needs 2 or 3 channels, got " + std::to_string(channels()));
  }
  if (!data.all_finite()) throw NumericError("skeleton sequence contains non-finite values");
  if (has_confidence()) {
    const auto view = data.trailing_view();
    if ((view.col(2).array() < 0.0).any() || (view.col(2).array() > 1.0).any()) {
      throw NumericError("confidence values must lie in [0, 1]");
    }
  }
}

}  // namespace skelet
