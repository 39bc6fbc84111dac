#include "spacee/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "spacee/config_file.hpp"
#include "spacee/error.hpp"

namespace spacee {

namespace {

void require_square(const Matrix& m) {
  if (!m.is_square()) throw std::invalid_argument("pattern diagnostics need square matrices");
}

void require_same(const Matrix& a, const Matrix& b) {
  require_square(a);
  if (a.rows() != b.rows() || !b.is_square()) {
    throw std::invalid_argument("pattern diagnostics need matrices of the same size");
  }
}

double distance_to_identity(const Matrix& m) {
  return frobenius_norm(m - Matrix::identity(m.rows()));
}

}  // namespace

double symmetry_deviation(const Matrix& r) {
  require_square(r);
  return distance_to_identity(r * r) / std::sqrt(static_cast<double>(r.rows()));
}

double inversion_deviation(const Matrix& r1, const Matrix& r2) {
  require_same(r1, r2);
  return std::max(distance_to_identity(r1 * r2), distance_to_identity(r2 * r1)) /
         std::sqrt(static_cast<double>(r1.rows()));
}

double composition_deviation(const Matrix& r1, const Matrix& r2, const Matrix& r3) {
  require_same(r1, r2);
  require_same(r1, r3);
  return frobenius_norm(r3 - r1 * r2) / std::max(frobenius_norm(r3), kDeviationEpsilon);
}

double abelian_deviation(const Matrix& r1, const Matrix& r2) {
  require_same(r1, r2);
  const Matrix ab = r1 * r2;
  return frobenius_norm(ab - r2 * r1) / std::max(frobenius_norm(ab), kDeviationEpsilon);
}

std::vector<double> singular_values(const Matrix& r) {
  require_square(r);
  const std::size_t n = r.rows();
  constexpr int kMaxSweeps = 100;
  constexpr double kTol = 1e-15;
  // Column-major copy so column pairs are contiguous.
  std::vector<double> u(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) u[j * n + i] = r(i, j);
  }
  bool converged = n < 2;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double* ci = u.data() + i * n;
        double* cj = u.data() + j * n;
        double a = 0, b = 0, g = 0;
        for (std::size_t k = 0; k < n; ++k) {
          a += ci[k] * ci[k];
          b += cj[k] * cj[k];
          g += ci[k] * cj[k];
        }
        if (std::abs(g) <= kTol * std::sqrt(a * b)) continue;
        converged = false;
        const double zeta = (b - a) / (2.0 * g);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < n; ++k) {
          const double x = ci[k], y = cj[k];
          ci[k] = c * x - s * y;
          cj[k] = s * x + c * y;
        }
      }
    }
  }
  if (!converged) throw NumericError("singular value sweeps did not converge");
  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    sigma[j] = std::sqrt(squared_frobenius_norm(std::span<const double>(u.data() + j * n, n)));
  }
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  return sigma;
}

MatrixExport export_heatmap(const Matrix& m) {
  MatrixExport e;
  e.rows = m.rows();
  e.cols = m.cols();
  e.values = Matrix(m.rows(), m.cols());
  const double norm = frobenius_norm(m);
  e.zero_source = norm == 0.0;
  if (e.zero_source) return e;
  auto src = m.values();
  auto dst = e.values.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::abs(src[i]) / norm;
  return e;
}

void write_heatmap(std::ostream& out, const MatrixExport& heatmap) {
  out << heatmap.rows << ' ' << heatmap.cols << '\n';
  char buf[32];
  for (std::size_t i = 0; i < heatmap.rows; ++i) {
    for (std::size_t j = 0; j < heatmap.cols; ++j) {
      std::snprintf(buf, sizeof buf, "%.6g", heatmap.values(i, j));
      out << (j == 0 ? "" : " ") << buf;
    }
    out << '\n';
  }
}

double identity_ratio(const Matrix& m) {
  require_square(m);
  const auto e = export_heatmap(m);
  const std::size_t n = m.rows();
  if (n < 2) return std::numeric_limits<double>::infinity();
  double diag = 0, off = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) (i == j ? diag : off) += e.values(i, j);
  }
  diag /= static_cast<double>(n);
  off /= static_cast<double>(n * (n - 1));
  if (off == 0.0) return diag == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diag / off;
}

std::string_view query_kind_name(QueryKind k) {
  switch (k) {
    case QueryKind::Symmetry: return "symmetry";
    case QueryKind::Inversion: return "inversion";
    case QueryKind::Composition: return "composition";
    case QueryKind::Abelian: return "abelian";
    case QueryKind::Singularity: return "singularity";
    case QueryKind::Identity: return "identity";
  }
  return "?";
}

PatternQuery parse_pattern_query(std::string_view text) {
  auto words = split_words(text);
  if (words.empty()) throw ConfigError("empty pattern query");
  PatternQuery q;
  bool found = false;
  for (auto k : {QueryKind::Symmetry, QueryKind::Inversion, QueryKind::Composition,
                 QueryKind::Abelian, QueryKind::Singularity, QueryKind::Identity}) {
    if (query_kind_name(k) == words[0]) {
      q.kind = k;
      found = true;
    }
  }
  if (!found) throw ConfigError("unknown pattern query kind '" + words[0] + "'");
  q.relations.assign(words.begin() + 1, words.end());
  return q;
}

Matrix relation_matrix(const ModelParams& params, RelationId r, bool reverse) {
  if (params.shape.kind != ModelKind::SpaceE) {
    throw ConfigError("pattern analysis needs a spacee model");
  }
  const std::size_t q = params.shape.q;
  return Matrix(q, q, reverse ? params.relation_rev.row(r) : params.relation_fwd.row(r));
}

namespace {

std::size_t arity(QueryKind k) {
  switch (k) {
    case QueryKind::Symmetry:
    case QueryKind::Singularity: return 1;
    case QueryKind::Inversion:
    case QueryKind::Abelian: return 2;
    case QueryKind::Composition: return 3;
    case QueryKind::Identity: return 0;  // any positive count
  }
  return 0;
}

Matrix resolve(const ModelParams& params, const Vocabulary& relations, const std::string& name) {
  const bool reverse = !name.empty() && name.front() == '~';
  const std::string base = reverse ? name.substr(1) : name;
  auto id = relations.find(base);
  if (!id) {
    std::string valid;
    for (const auto& n : relations.names()) valid += (valid.empty() ? "" : ", ") + n;
    throw ConfigError("unknown relation '" + base + "'; valid relations: " + valid);
  }
  return relation_matrix(params, *id, reverse);
}

}  // namespace

std::vector<PatternReport> analyze(const ModelParams& params, const Vocabulary& relations,
                                   const std::vector<PatternQuery>& queries) {
  std::vector<PatternReport> out;
  for (const auto& query : queries) {
    const std::size_t want = arity(query.kind);
    if ((want == 0 && query.relations.empty()) || (want != 0 && query.relations.size() != want)) {
      throw ConfigError(std::string(query_kind_name(query.kind)) + " query has the wrong number of relations");
    }
    std::vector<Matrix> m;
    for (const auto& name : query.relations) m.push_back(resolve(params, relations, name));

    PatternReport rep;
    rep.kind = query.kind;
    rep.relations = query.relations;
    switch (query.kind) {
      case QueryKind::Symmetry:
        rep.deviation = symmetry_deviation(m[0]);
        rep.heatmap_source = m[0] * m[0];
        rep.identity_ratio = identity_ratio(rep.heatmap_source);
        break;
      case QueryKind::Inversion:
        rep.deviation = inversion_deviation(m[0], m[1]);
        rep.heatmap_source = m[0] * m[1];
        rep.identity_ratio = identity_ratio(rep.heatmap_source);
        break;
      case QueryKind::Composition:
        rep.deviation = composition_deviation(m[0], m[1], m[2]);
        rep.heatmap_source = m[0] * m[1];
        break;
      case QueryKind::Abelian:
        rep.deviation = abelian_deviation(m[0], m[1]);
        rep.heatmap_source = m[0] * m[1] - m[1] * m[0];
        break;
      case QueryKind::Singularity: {
        rep.singular_values = singular_values(m[0]);
        const double top = rep.singular_values.front();
        rep.deviation = top > 0.0 ? rep.singular_values.back() / top : 0.0;
        rep.heatmap_source = m[0];
        break;
      }
      case QueryKind::Identity: {
        Matrix prod = m[0];
        for (std::size_t i = 1; i < m.size(); ++i) prod = prod * m[i];
        rep.deviation = distance_to_identity(prod) / std::sqrt(static_cast<double>(prod.rows()));
        rep.identity_ratio = identity_ratio(prod);
        rep.heatmap_source = std::move(prod);
        break;
      }
    }
    out.push_back(std::move(rep));
  }
  return out;
}

std::vector<PatternQuery> default_queries(const Vocabulary& relations) {
  std::vector<PatternQuery> out;
  for (const auto& name : relations.names()) {
    out.push_back({QueryKind::Symmetry, {name}});
    out.push_back({QueryKind::Singularity, {name}});
  }
  return out;
}

void write_pattern_reports(std::ostream& out, const std::vector<PatternReport>& reports) {
  char buf[40];
  for (const auto& r : reports) {
    std::string rels;
    for (const auto& n : r.relations) rels += (rels.empty() ? "" : ",") + n;
    std::snprintf(buf, sizeof buf, "%.10g", r.deviation);
    out << query_kind_name(r.kind) << '\t' << rels << '\t' << buf << '\n';
  }
}

}  // namespace spacee
