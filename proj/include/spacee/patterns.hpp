#pragma once
// Relation-pattern diagnostics over learned relation matrices.
//
//   symmetric           R^2 = I
//   r2 inverse of r1    R1 R2 = R2 R1 = I
//   r3 = r1 then r2     R3 = R1 R2
//   abelian pair        R1 R2 = R2 R1
//   non-injective       R (or R_rev) singular
//
// Every deviation is a normalized Frobenius distance, so values are
// comparable across q.

#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "spacee/kg.hpp"
#include "spacee/matrix.hpp"
#include "spacee/model.hpp"

namespace spacee {

inline constexpr double kDeviationEpsilon = 1e-12;

// ||R^2 - I||_F / sqrt(q)
double symmetry_deviation(const Matrix& r);
// max(||R1 R2 - I||_F, ||R2 R1 - I||_F) / sqrt(q)
double inversion_deviation(const Matrix& r1, const Matrix& r2);
// ||R3 - R1 R2||_F / max(||R3||_F, eps)
double composition_deviation(const Matrix& r1, const Matrix& r2, const Matrix& r3);
// ||R1 R2 - R2 R1||_F / max(||R1 R2||_F, eps)
double abelian_deviation(const Matrix& r1, const Matrix& r2);

// Descending singular values by one-sided Jacobi. Throws NumericError if the
// sweeps do not converge.
std::vector<double> singular_values(const Matrix& r);

struct MatrixExport {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Matrix values;         // |M| / ||M||_F
  bool zero_source = false;
};

MatrixExport export_heatmap(const Matrix& m);

// "rows cols" header, then one line per row, 6 significant digits.
void write_heatmap(std::ostream& out, const MatrixExport& heatmap);

// Mean diagonal over mean off-diagonal of |M| / ||M||_F. Large values mean
// "close to a scaled identity". Infinite when the off-diagonal is all zero.
double identity_ratio(const Matrix& m);

enum class QueryKind { Symmetry, Inversion, Composition, Abelian, Singularity, Identity };

std::string_view query_kind_name(QueryKind k);

// A relation operand; a leading '~' on the name selects the reverse matrix.
struct RelationRef {
  std::string name;
  RelationId id = 0;
  bool reverse = false;
};

struct PatternQuery {
  QueryKind kind = QueryKind::Symmetry;
  std::vector<std::string> relations;
};

// "symmetry r", "inversion r1 r2", "composition r1 r2 r3", "abelian r1 r2",
// "singularity r", "identity m1 m2 ... mk" (product compared with I).
PatternQuery parse_pattern_query(std::string_view text);

struct PatternReport {
  QueryKind kind = QueryKind::Symmetry;
  std::vector<std::string> relations;
  double deviation = 0.0;  // for singularity: sigma_min / sigma_max
  std::vector<double> singular_values;  // singularity only
  double identity_ratio = std::numeric_limits<double>::quiet_NaN();
  Matrix heatmap_source;  // the matrix a contour plot of this query would show
};

Matrix relation_matrix(const ModelParams& params, RelationId r, bool reverse);

// Throws ConfigError for unknown names, wrong arity or a non-SpaceE model.
std::vector<PatternReport> analyze(const ModelParams& params, const Vocabulary& relations,
                                   const std::vector<PatternQuery>& queries);

// Symmetry and singularity of every relation.
std::vector<PatternQuery> default_queries(const Vocabulary& relations);

// "kind<TAB>relations<TAB>deviation" lines, relations joined with ','.
void write_pattern_reports(std::ostream& out, const std::vector<PatternReport>& reports);

}  // namespace spacee
