#include "normforge/io.hpp"

#include <fstream>
#include <sstream>

namespace normforge::io {

namespace {

Vector vector_from(const json& j, const char* what) {
  if (!j.is_array()) fail(ErrorKind::kIo, std::string(what) + " must be an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(ErrorKind::kIo, std::string(what) + " has a non-numeric entry");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix matrix_from(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::kIo, std::string(what) + " must be a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      fail(ErrorKind::kIo, std::string(what) + " rows have unequal lengths");
    }
    m.row(static_cast<Index>(r)) = vector_from(j[r], what).transpose();
  }
  return m;
}

double number_or(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_string() && v.get<std::string>() == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (!v.is_number()) fail(ErrorKind::kIo, std::string("field '") + key + "' must be numeric");
  return v.get<double>();
}

NormTerm term_from(const json& t) {
  if (!t.is_object() || !t.contains("type")) fail(ErrorKind::kIo, "term without a type");
  const std::string type = t.at("type").get<std::string>();
  if (type == "linear") return linear(vector_from(t.at("a"), "linear.a"));
  if (type == "graph_edge") {
    return graph_edge(t.at("u").get<Index>(), t.at("v").get<Index>(), number_or(t, "c", 1.0));
  }
  if (type == "hyperedge") {
    return hyperedge(t.at("vertices").get<std::vector<Index>>(), number_or(t, "c", 1.0));
  }
  if (type == "lp_image") return lp_image(matrix_from(t.at("rows"), "lp_image.rows"), number_or(t, "p", 2.0));
  if (type == "euclidean") return euclidean(number_or(t, "t", 1.0));
  fail(ErrorKind::kIo, "unknown term type '" + type + "'");
}

json term_to(const NormTerm& term) {
  return std::visit(
      [](const auto& t) -> json {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, LinearTerm>) {
          return {{"type", "linear"}, {"a", to_json(t.a)}};
        } else if constexpr (std::is_same_v<T, GraphEdgeTerm>) {
          return {{"type", "graph_edge"}, {"u", t.u}, {"v", t.v}, {"c", t.c}};
        } else if constexpr (std::is_same_v<T, HyperedgeTerm>) {
          return {{"type", "hyperedge"}, {"vertices", t.vertices}, {"c", t.c}};
        } else if constexpr (std::is_same_v<T, LpImageTerm>) {
          json rows = json::array();
          for (Index r = 0; r < t.rows.rows(); ++r) rows.push_back(to_json(Vector(t.rows.row(r).transpose())));
          json p = std::isinf(t.p) ? json("inf") : json(t.p);
          return {{"type", "lp_image"}, {"p", p}, {"rows", rows}};
        } else if constexpr (std::is_same_v<T, EuclideanTerm>) {
          return {{"type", "euclidean"}, {"t", t.t}};
        } else {
          fail(ErrorKind::kIo, "lovasz terms have no serialized form");
        }
      },
      term);
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

SumNorm instance_from_json(const json& j) {
  try {
    if (!j.is_object()) fail(ErrorKind::kIo, "instance must be a JSON object");
    const Index dim = j.at("dim").get<Index>();
    const double p = number_or(j, "p", 1.0);
    std::vector<NormTerm> terms;
    for (const json& t : j.at("terms")) terms.push_back(term_from(t));
    if (j.contains("weights")) {
      return SumNorm(dim, p, std::move(terms), vector_from(j.at("weights"), "weights"));
    }
    return SumNorm(dim, p, std::move(terms));
  } catch (const json::exception& e) {
    fail(ErrorKind::kIo, std::string("malformed instance: ") + e.what());
  }
}

json instance_to_json(const SumNorm& N) {
  json terms = json::array();
  for (const NormTerm& t : N.terms()) terms.push_back(term_to(t));
  return {{"dim", N.dim()}, {"p", N.p()}, {"terms", terms}, {"weights", to_json(N.weights())}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::kIo, "'" + path + "' is not valid JSON: " + e.what());
  }
}

SumNorm load_instance(const std::string& path) { return instance_from_json(read_json_file(path)); }

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(ErrorKind::kIo, "write to '" + path + "' failed");
}

void write_weights(const std::string& path, const Vector& w) {
  std::ostringstream s;
  s.precision(17);
  if (ends_with(path, ".csv")) {
    s << "index,weight\n";
    for (Index i = 0; i < w.size(); ++i) s << i << ',' << w(i) << '\n';
  } else {
    s << to_json(w).dump() << '\n';
  }
  write_text_file(path, s.str());
}

Vector read_weights(const std::string& path, Index expected) {
  Vector w;
  if (ends_with(path, ".csv")) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::kIo, "cannot open '" + path + "'");
    w = Vector::Zero(expected);
    std::string line;
    Index row = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) fail(ErrorKind::kIo, "weights CSV line without a comma");
      if (row++ == 0 && line.find("index") != std::string::npos) continue;
      const long idx = std::stol(line.substr(0, comma));
      if (idx < 0 || idx >= expected) fail(ErrorKind::kDimensionMismatch, "weights CSV index out of range");
      w(idx) = std::stod(line.substr(comma + 1));
    }
  } else {
    w = vector_from(read_json_file(path), "weights");
  }
  if (w.size() != expected) {
    fail(ErrorKind::kDimensionMismatch, "weights file has " + std::to_string(w.size()) +
                                            " entries, instance has " + std::to_string(expected) +
                                            " terms");
  }
  return w;
}

void write_samples(std::ostream& out, const SampleBatch& batch) {
  for (Index j = 0; j < batch.count(); ++j) {
    out << json{{"x", to_json(Vector(batch.points.col(j)))}, {"phat", batch.phat}}.dump() << '\n';
  }
}

SampleBatch read_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path + "'");
  std::vector<Vector> cols;
  double phat = 0.0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(ErrorKind::kIo, "bad sample line: " + std::string(e.what()));
    }
    cols.push_back(vector_from(j.at("x"), "sample"));
    const double ph = number_or(j, "phat", 0.0);
    if (cols.size() > 1 && ph != phat) fail(ErrorKind::kIo, "samples mix different phat values");
    phat = ph;
    if (cols.back().size() != cols.front().size()) fail(ErrorKind::kIo, "samples differ in dimension");
  }
  if (cols.empty()) fail(ErrorKind::kIo, "'" + path + "' holds no samples");
  SampleBatch batch;
  batch.points.resize(cols.front().size(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) batch.points.col(static_cast<Index>(j)) = cols[j];
  batch.law = SampleLaw::kExpPower;
  batch.phat = phat;
  return batch;
}

BlockStructure blocks_from_json(const json& j, Index rows, double q_default) {
  BlockStructure b;
  try {
    b.q = number_or(j, "q", q_default);
    if (j.contains("blocks")) {
      for (const json& blk : j.at("blocks")) {
        b.blocks.push_back({blk.at("start").get<Index>(), blk.at("size").get<Index>(), number_or(blk, "p", 2.0)});
      }
    } else {
      b = BlockStructure::uniform(rows, j.at("block_size").get<Index>(), number_or(j, "p", 2.0), b.q);
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::kIo, std::string("malformed blocks file: ") + e.what());
  }
  b.validate(rows);
  return b;
}

json to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json to_json(const StageRecord& rec) {
  return {{"stage", rec.stage},         {"t", rec.t},
          {"epsilon", rec.epsilon},     {"M", rec.M},
          {"support", rec.support},     {"equivalence_ratio", rec.equivalence_ratio},
          {"attempts", rec.attempts},   {"seconds", rec.seconds},
          {"evaluations", rec.evaluations}};
}

json to_json(const SparsifierResult& r) {
  json stages = json::array();
  for (const StageRecord& s : r.stage_log) stages.push_back(to_json(s));
  auto summary = [](const Vector& v) -> json {
    if (v.size() == 0) return nullptr;
    return {{"min", v.minCoeff()}, {"max", v.maxCoeff()}, {"sum", v.sum()}, {"size", v.size()}};
  };
  return {{"M", r.M},
          {"support_size", r.support.size()},
          {"weight_sum", r.weights.sum()},
          {"seed", r.seed},
          {"stage_log", stages},
          {"tau", summary(r.tau)},
          {"rho", summary(r.rho)},
          {"warnings", r.warnings},
          {"smoothness_proxy", r.smoothness_proxy},
          {"equivalence_ratio", r.equivalence_ratio}};
}

json to_json(const VerificationReport& r) {
  return {{"max_rel_err", r.max_rel_err},
          {"argmax", to_json(r.argmax)},
          {"argmax_family", r.argmax_family},
          {"probe_counts", r.probe_counts},
          {"exact", r.exact},
          {"epsilon", r.epsilon},
          {"pass", r.pass},
          {"zero_consistent", r.zero_consistent},
          {"skipped", r.skipped}};
}

json to_json(const LewisResult& r) {
  return {{"W", to_json(r.W)},
          {"alpha", to_json(r.alpha)},
          {"iterations", r.iterations},
          {"residual", r.residual},
          {"converged", r.converged},
          {"monotone_tail", r.monotone_tail}};
}

json to_json(const LewisCertificate& c) {
  return {{"passed", c.passed},           {"upper_ok", c.upper_ok},
          {"lower_ok", c.lower_ok},       {"sum_ok", c.sum_ok},
          {"worst_upper", c.worst_upper}, {"worst_lower", c.worst_lower},
          {"alpha_sum", c.alpha_sum},     {"alpha_target", c.alpha_target},
          {"probes", c.probes},           {"failure", c.failure},
          {"witness", to_json(c.witness)}};
}

}  // namespace normforge::io
