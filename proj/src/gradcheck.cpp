#include "skelet/gradcheck.hpp"

#include <cmath>

namespace skelet {

namespace {

double evaluate(const ScalarObjective& f) {
  Tape tape;
  const double v = tape.value(f(tape)).flat()[0];
  if (!std::isfinite(v)) throw NumericError("objective is not finite during gradient check");
  return v;
}

}  // namespace

GradCheckReport check_gradients(const ScalarObjective& f, std::span<Parameter* const> params,
                                double step) {
  for (Parameter* p : params) {
    if (!p->value.all_finite()) throw NumericError("gradient check on non-finite parameter values");
    p->grad = Tensor::zeros(p->value.shape());
  }

  {
    Tape tape;
    Var root = f(tape);
    if (!std::isfinite(tape.value(root).flat()[0])) {
      throw NumericError("objective is not finite during gradient check");
    }
    tape.backward(root);
  }

  GradCheckReport report;
  for (std::size_t slot = 0; slot < params.size(); ++slot) {
    Parameter& p = *params[slot];
    for (Index i = 0; i < p.value.size(); ++i) {
      const double original = p.value.flat()[i];
      p.value.flat()[i] = original + step;
      const double up = evaluate(f);
      p.value.flat()[i] = original - step;
      const double down = evaluate(f);
      p.value.flat()[i] = original;

      const double numeric = (up - down) / (2.0 * step);
      const double analytic = p.grad.flat()[i];
      const double err = std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
      if (err > report.max_rel_error || report.coordinates == 0) {
        report.max_rel_error = std::max(report.max_rel_error, err);
        report.worst_parameter = slot;
        report.worst_index = i;
      }
      ++report.coordinates;
    }
  }
  return report;
}

}  // namespace skelet
