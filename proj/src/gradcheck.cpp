#include "afford/gradcheck.hpp"

#include <cmath>

#include "afford/error.hpp"

namespace afford {

GradCheckReport gradient_check(ParamStore& store, const std::function<double()>& loss,
                               const std::function<void()>& backward, double eps) {
  double l0 = loss();
  double l1 = loss();
  if (!(l0 == l1)) {
    throw NumericError("gradient_check: forward closure is not deterministic (" +
                       std::to_string(l0) + " vs " + std::to_string(l1) + ")");
  }

  store.zero_grads();
  backward();
  std::map<std::string, Tensor> analytic;
  for (const auto& [name, p] : store.entries()) analytic.emplace(name, p.grad);

  GradCheckReport report;
  for (auto& [name, p] : store.entries()) {
    const Tensor& a = analytic.at(name);
    double worst = 0.0;
    for (int i = 0; i < p.value.size(); ++i) {
      double saved = p.value[i];
      p.value[i] = saved + eps;
      double fp = loss();
      p.value[i] = saved - eps;
      double fm = loss();
      p.value[i] = saved;
      double numeric = (fp - fm) / (2.0 * eps);
      double denom = std::max({std::fabs(a[i]), std::fabs(numeric), 1e-4});
      double rel = std::fabs(a[i] - numeric) / denom;
      worst = std::max(worst, rel);
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = name;
        report.worst_index = i;
        report.worst_analytic = a[i];
        report.worst_numeric = numeric;
      }
    }
    report.per_param[name] = worst;
  }
  return report;
}

}  // namespace afford
