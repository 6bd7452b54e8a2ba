#include "credscan/analysis.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "credscan/error.h"
#include "credscan/random.h"

namespace credscan {
namespace {

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // unbiased
};

MeanVar mean_var(std::span<const double> xs) {
  // Welford, so large samples of nearly equal distances stay accurate.
  MeanVar mv;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double x : xs) {
    ++n;
    const double d = x - mv.mean;
    mv.mean += d / static_cast<double>(n);
    m2 += d * (x - mv.mean);
  }
  mv.var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  return mv;
}

// Continued fraction for I_x(a, b); converges for x < (a + 1) / (a + b + 2).
double beta_cf(double x, double a, double b) {
  constexpr int kMaxIter = 200000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void normalize(std::vector<double>& v) {
  const double n = std::sqrt(dot(v, v));
  for (double& x : v) x /= n;
}

void orient(std::vector<double>& v) {
  const auto it = std::max_element(v.begin(), v.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  if (it != v.end() && *it < 0.0) {
    for (double& x : v) x = -x;
  }
}

}  // namespace

double euclidean(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) throw DomainError("euclidean: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::clamp(front * beta_cf(x, a, b) / a, 0.0, 1.0);
  return std::clamp(1.0 - front * beta_cf(1.0 - x, b, a) / b, 0.0, 1.0);
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw DomainError("Student's t needs df > 0");
  if (std::isnan(t)) throw DomainError("Student's t of NaN");
  if (t == 0.0) return 1.0;
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return std::clamp(regularized_incomplete_beta(x, df / 2.0, 0.5), 0.0, 1.0);
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw DomainError("Welch's t-test needs at least two values per sample");
  const auto ma = mean_var(a);
  const auto mb = mean_var(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double sa = ma.var / na;
  const double sb = mb.var / nb;
  const double se2 = sa + sb;
  if (!(se2 > 0.0)) throw DomainError("Welch's t-test is undefined when both samples have zero variance");
  WelchResult r;
  r.t = (ma.mean - mb.mean) / std::sqrt(se2);
  r.df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p = student_t_two_sided_p(r.t, r.df);
  return r;
}

SeparationReport separation(std::span<const EmbeddingVector> embeddings,
                            std::span<const CredentialCategory> categories, const SeparationOptions& options) {
  const std::size_t n = embeddings.size();
  if (categories.size() != n) throw DomainError("separation: embeddings and categories differ in length");
  if (n < 2) throw DomainError("separation needs at least two samples");
  for (const auto& e : embeddings) {
    if (e.dimension() != embeddings.front().dimension()) throw DomainError("separation: dimension mismatch");
  }

  SeparationReport report;
  report.total_pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  std::vector<double> intra, inter;
  auto record = [&](std::size_t i, std::size_t j) {
    const double d = euclidean(embeddings[i], embeddings[j]);
    (categories[i] == categories[j] ? intra : inter).push_back(d);
  };

  if (report.total_pairs <= options.pair_budget) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) record(i, j);
    }
  } else {
    report.sampled = true;
    Rng rng(options.seed);
    for (std::uint64_t k = 0; k < options.pair_budget; ++k) {
      const auto i = static_cast<std::size_t>(uniform_below(rng, n));
      auto j = static_cast<std::size_t>(uniform_below(rng, n - 1));
      if (j >= i) ++j;
      record(std::min(i, j), std::max(i, j));
    }
  }
  if (intra.empty()) throw DomainError("separation: no same-category pair");
  if (inter.empty()) throw DomainError("separation: no cross-category pair");

  report.n_intra = intra.size();
  report.n_inter = inter.size();
  report.mean_intra = mean_var(intra).mean;
  report.mean_inter = mean_var(inter).mean;
  try {
    report.welch = welch_t_test(intra, inter);
    report.p_underflow = report.welch->p < kPValueUnderflow;
  } catch (const DomainError& e) {
    report.test_error = e.what();
  }
  return report;
}

nlohmann::json separation_to_json(const SeparationReport& r) {
  nlohmann::json j = {{"mean_intra", r.mean_intra}, {"mean_inter", r.mean_inter}, {"n_intra", r.n_intra},
                      {"n_inter", r.n_inter},       {"sampled", r.sampled},       {"total_pairs", r.total_pairs}};
  if (r.welch) {
    j["t_statistic"] = r.welch->t;
    j["degrees_freedom"] = r.welch->df;
    j["p_value"] = r.welch->p;
    j["p_underflow"] = r.p_underflow;
  } else {
    j["t_statistic"] = nullptr;
    j["degrees_freedom"] = nullptr;
    j["p_value"] = nullptr;
    j["p_underflow"] = false;
    j["test_error"] = r.test_error;
  }
  return j;
}

Projection project_2d(std::span<const EmbeddingVector> embeddings, const ProjectionOptions& options) {
  const std::size_t n = embeddings.size();
  if (n < 2) throw DomainError("projection needs at least two vectors");
  const std::size_t dim = embeddings.front().dimension();
  if (dim == 0) throw DomainError("projection of zero-dimensional vectors");
  for (const auto& e : embeddings) {
    if (e.dimension() != dim) throw DomainError("projection: dimension mismatch");
  }

  std::vector<double> mean(dim, 0.0);
  for (const auto& e : embeddings) {
    for (std::size_t k = 0; k < dim; ++k) mean[k] += e[k];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  std::vector<std::vector<double>> centered(n, std::vector<double>(dim));
  double total_ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      centered[i][k] = embeddings[i][k] - mean[k];
      total_ss += centered[i][k] * centered[i][k];
    }
  }
  if (!(total_ss > 0.0)) throw DomainError("projection: data has zero variance");

  // w = X^T X v
  auto gram_apply = [&](const std::vector<double>& v) {
    std::vector<double> w(dim, 0.0);
    for (const auto& row : centered) {
      const double s = dot(row, v);
      for (std::size_t k = 0; k < dim; ++k) w[k] += s * row[k];
    }
    return w;
  };
  auto project_out = [&](std::vector<double>& v, const std::vector<double>& u) {
    const double s = dot(v, u);
    for (std::size_t k = 0; k < dim; ++k) v[k] -= s * u[k];
  };

  Rng rng(options.seed);
  auto power = [&](const std::vector<double>* deflate) {
    std::vector<double> v(dim);
    for (double& x : v) x = uniform_real(rng, -1.0, 1.0);
    if (deflate) project_out(v, *deflate);
    normalize(v);
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
      auto w = gram_apply(v);
      if (deflate) project_out(w, *deflate);
      const double norm = std::sqrt(dot(w, w));
      if (!(norm > std::numeric_limits<double>::min() * 1e6 * total_ss)) break;  // no variance left: keep v
      for (double& x : w) x /= norm;
      double diff = 0.0;
      for (std::size_t k = 0; k < dim; ++k) diff = std::max(diff, std::abs(w[k] - v[k]));
      v = std::move(w);
      if (diff < options.tolerance) break;
    }
    if (deflate) {
      project_out(v, *deflate);
      normalize(v);
    }
    orient(v);
    return v;
  };

  Projection out;
  out.component1 = power(nullptr);
  out.component2 = power(&out.component1);
  out.points.reserve(n);
  double ss1 = 0.0, ss2 = 0.0;
  for (const auto& row : centered) {
    const double x = dot(row, out.component1);
    const double y = dot(row, out.component2);
    out.points.emplace_back(x, y);
    ss1 += x * x;
    ss2 += y * y;
  }
  out.variance1 = ss1 / static_cast<double>(n - 1);
  out.variance2 = ss2 / static_cast<double>(n - 1);
  return out;
}

std::string projection_to_csv(const Projection& projection, std::span<const CredentialCategory> categories) {
  if (categories.size() != projection.points.size()) {
    throw DomainError("projection_to_csv: categories and points differ in length");
  }
  std::ostringstream os;
  os << "x,y,category_id\n" << std::setprecision(17);
  for (std::size_t i = 0; i < categories.size(); ++i) {
    os << projection.points[i].first << ',' << projection.points[i].second << ',' << category_id(categories[i])
       << '\n';
  }
  return os.str();
}

}  // namespace credscan
