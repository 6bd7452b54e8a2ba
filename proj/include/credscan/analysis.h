#pragma once

// Embedding-space statistics: pairwise Euclidean distances, intra- vs
// inter-class separation with Welch's t-test, and a PCA projection for plots.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "credscan/embedder.h"
#include "credscan/taxonomy.h"

namespace credscan {

// Throws DomainError on a dimension mismatch.
double euclidean(const EmbeddingVector& a, const EmbeddingVector& b);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of
// freedom. Throws DomainError if either sample has fewer than two values or
// both have zero variance.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

// Two-sided tail probability P(|T| >= |t|) for Student's t with `df` degrees
// of freedom, as I_{df/(df+t^2)}(df/2, 1/2). Throws DomainError if df <= 0.
double student_t_two_sided_p(double t, double df);

// Regularized incomplete beta I_x(a, b) by continued fraction (modified Lentz).
double regularized_incomplete_beta(double x, double a, double b);

// Values below this are reported with the underflow flag set.
inline constexpr double kPValueUnderflow = 1e-300;

struct SeparationOptions {
  // Above this many pairs, distances come from a seeded uniform sample of
  // pairs (drawn with replacement) of this size.
  std::uint64_t pair_budget = 2'000'000;
  std::uint64_t seed = 42;
};

struct SeparationReport {
  double mean_intra = 0.0;
  double mean_inter = 0.0;
  std::uint64_t n_intra = 0;
  std::uint64_t n_inter = 0;
  bool sampled = false;
  std::uint64_t total_pairs = 0;
  // Absent when the test is degenerate (e.g. all distances equal); see
  // test_error.
  std::optional<WelchResult> welch;
  bool p_underflow = false;
  std::string test_error;
};

// Throws DomainError with fewer than two samples, or when there is no
// same-category or no cross-category pair.
SeparationReport separation(std::span<const EmbeddingVector> embeddings,
                            std::span<const CredentialCategory> categories, const SeparationOptions& options = {});

nlohmann::json separation_to_json(const SeparationReport& report);

struct ProjectionOptions {
  std::size_t max_iterations = 1000;
  double tolerance = 1e-12;
  std::uint64_t seed = 7;
};

struct Projection {
  std::vector<std::pair<double, double>> points;  // input order
  std::vector<double> component1;
  std::vector<double> component2;
  double variance1 = 0.0;  // sample variance along each component
  double variance2 = 0.0;
};

// PCA onto two components: mean-center, then power iteration on the
// covariance (applied as X^T X v, never formed), the second component kept
// orthogonal to the first. Each component's largest-magnitude entry is made
// positive. Throws DomainError with fewer than two vectors, mixed dimensions,
// or zero total variance.
Projection project_2d(std::span<const EmbeddingVector> embeddings, const ProjectionOptions& options = {});

// "x,y,category_id" rows with a header line.
std::string projection_to_csv(const Projection& projection, std::span<const CredentialCategory> categories);

}  // namespace credscan
