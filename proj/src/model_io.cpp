#include "clindiag/model_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "clindiag/error.hpp"

namespace clindiag {

using nlohmann::json;

std::string format_exact(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_exact(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(ErrorCode::CorruptModel, "bad numeric field '" + std::string(text) + "'");
  return value;
}

std::string checksum_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write to '" + path.string() + "' failed");
}

namespace {

json vector_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(format_exact(v(i)));
  return arr;
}

Eigen::VectorXd vector_from(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_exact(arr[i].get<std::string>());
  return v;
}

json scaling_json(const std::optional<Scaling>& scaling) {
  if (!scaling) return nullptr;
  return {{"mean", vector_json(scaling->mean)},
          {"stddev", vector_json(scaling->stddev)},
          {"zero_variance", scaling->zero_variance}};
}

std::optional<Scaling> scaling_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  Scaling s;
  s.mean = vector_from(j.at("mean"));
  s.stddev = vector_from(j.at("stddev"));
  s.zero_variance = j.at("zero_variance").get<std::vector<bool>>();
  s.validate();
  return s;
}

json linear_body(const SvmModel& m) {
  json support = json::array();
  for (const auto& s : m.support)
    support.push_back({{"index", s.index}, {"alpha", format_exact(s.alpha)}, {"label", static_cast<int>(s.label)}});
  const auto& t = m.training_summary;
  return {{"weights", vector_json(m.weights)},
          {"offset", format_exact(m.offset)},
          {"C", format_exact(m.C)},
          {"scaling", scaling_json(m.scaling)},
          {"support", support},
          {"training_summary",
           {{"size", t.size},
            {"iterations", t.iterations},
            {"kkt_violation", format_exact(t.kkt_violation)},
            {"objective", format_exact(t.objective)},
            {"tol", format_exact(t.tol)},
            {"converged", t.converged}}}};
}

SvmModel linear_from(const json& j) {
  SvmModel m;
  m.weights = vector_from(j.at("weights"));
  m.offset = parse_exact(j.at("offset").get<std::string>());
  m.C = parse_exact(j.at("C").get<std::string>());
  m.scaling = scaling_from(j.at("scaling"));
  for (const auto& s : j.at("support"))
    m.support.push_back({s.at("index").get<Eigen::Index>(), parse_exact(s.at("alpha").get<std::string>()),
                         static_cast<double>(s.at("label").get<int>())});
  const auto& t = j.at("training_summary");
  m.training_summary.size = t.at("size").get<Eigen::Index>();
  m.training_summary.iterations = t.at("iterations").get<std::int64_t>();
  m.training_summary.kkt_violation = parse_exact(t.at("kkt_violation").get<std::string>());
  m.training_summary.objective = parse_exact(t.at("objective").get<std::string>());
  m.training_summary.tol = parse_exact(t.at("tol").get<std::string>());
  m.training_summary.converged = t.at("converged").get<bool>();
  if (m.weights.size() < 1) throw Error(ErrorCode::CorruptModel, "model has no weights");
  if (m.scaling && m.scaling->dims() != m.weights.size())
    throw Error(ErrorCode::CorruptModel, "scaling and weight dimensions differ");
  return m;
}

json tree_body(const PartitionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    json node = {{"leaf", n.leaf}, {"label", n.label}, {"purity", format_exact(n.purity)}, {"size", n.size}};
    if (!n.leaf) {
      node["model"] = linear_body(n.model);
      node["positive"] = n.positive_child;
      node["negative"] = n.negative_child;
    }
    nodes.push_back(std::move(node));
  }
  return {{"max_depth", tree.max_depth}, {"min_leaf_size", tree.min_leaf_size}, {"dims", tree.dims}, {"nodes", nodes}};
}

PartitionTree tree_from(const json& j) {
  PartitionTree tree;
  tree.max_depth = j.at("max_depth").get<int>();
  tree.min_leaf_size = j.at("min_leaf_size").get<Eigen::Index>();
  tree.dims = j.at("dims").get<Eigen::Index>();
  const auto& nodes = j.at("nodes");
  if (nodes.empty()) throw Error(ErrorCode::CorruptModel, "tree has no nodes");
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& n = nodes[k];
    TreeNode node;
    node.leaf = n.at("leaf").get<bool>();
    node.label = n.at("label").get<int>();
    node.purity = parse_exact(n.at("purity").get<std::string>());
    node.size = n.at("size").get<Eigen::Index>();
    if (!node.leaf) {
      node.model = linear_from(n.at("model"));
      node.positive_child = n.at("positive").get<std::size_t>();
      node.negative_child = n.at("negative").get<std::size_t>();
      // Children always follow their parent; this also rules out cycles.
      if (node.positive_child <= k || node.negative_child <= k || node.positive_child >= nodes.size() ||
          node.negative_child >= nodes.size() || node.model.dims() != tree.dims)
        throw Error(ErrorCode::CorruptModel, "malformed tree node " + std::to_string(k));
    }
    tree.nodes.push_back(std::move(node));
  }
  return tree;
}

}  // namespace

json model_to_json(const Classifier& classifier) {
  json doc;
  if (const auto* m = std::get_if<SvmModel>(&classifier)) {
    doc = linear_body(*m);
    doc["kind"] = "linear";
  } else {
    doc = tree_body(std::get<PartitionTree>(classifier));
    doc["kind"] = "tree";
  }
  doc["format_version"] = kModelFormatVersion;
  doc["checksum"] = checksum_hex(doc.dump());
  return doc;
}

Classifier model_from_json(const json& document) {
  try {
    if (!document.is_object()) throw Error(ErrorCode::CorruptModel, "model document is not an object");
    const int version = document.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw Error(ErrorCode::VersionMismatch, "model format version " + std::to_string(version) + " is not supported (expected " +
                                                  std::to_string(kModelFormatVersion) + ")");
    json body = document;
    const auto stored = body.at("checksum").get<std::string>();
    body.erase("checksum");
    if (checksum_hex(body.dump()) != stored) throw Error(ErrorCode::CorruptModel, "model checksum mismatch");
    const auto kind = document.at("kind").get<std::string>();
    if (kind == "linear") return linear_from(document);
    if (kind == "tree") return tree_from(document);
    throw Error(ErrorCode::CorruptModel, "unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptModel, std::string("malformed model: ") + e.what());
  }
}

void save_model(const Classifier& classifier, const std::filesystem::path& path) {
  write_text_file(path, model_to_json(classifier).dump(2) + "\n");
}

Classifier load_model(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::CorruptModel, "'" + path.string() + "' is not valid model JSON");
  return model_from_json(doc);
}

json schema_to_json(const EncodingSchema& schema) {
  json features = json::array();
  for (const auto& f : schema.features) {
    json feature = {{"name", f.name}, {"kind", f.kind == FeatureKind::Numeric ? "Numeric" : "Staged"}};
    if (f.kind == FeatureKind::Staged) {
      json stages = json::array();
      for (const auto& s : f.stages) stages.push_back({{"name", s.name}, {"value", s.value}});
      feature["stages"] = stages;
    }
    if (f.impute) feature["impute"] = *f.impute;
    features.push_back(std::move(feature));
  }
  return {{"features", features},
          {"label_rule",
           {{"label_column", schema.label_rule.label_column},
            {"positive_value", schema.label_rule.positive_value},
            {"negative_value", schema.label_rule.negative_value}}}};
}

EncodingSchema schema_from_json(const json& document) {
  EncodingSchema schema;
  try {
    for (const auto& f : document.at("features")) {
      FeatureSpec spec;
      spec.name = f.at("name").get<std::string>();
      const auto kind = f.at("kind").get<std::string>();
      if (kind == "Numeric" || kind == "numeric") {
        spec.kind = FeatureKind::Numeric;
      } else if (kind == "Staged" || kind == "staged") {
        spec.kind = FeatureKind::Staged;
      } else {
        throw Error(ErrorCode::InvalidSchema, "feature '" + spec.name + "' has unknown kind '" + kind + "'");
      }
      if (f.contains("stages"))
        for (const auto& s : f.at("stages")) spec.stages.push_back({s.at("name").get<std::string>(), s.at("value").get<double>()});
      if (f.contains("impute") && !f.at("impute").is_null()) spec.impute = f.at("impute").get<double>();
      schema.features.push_back(std::move(spec));
    }
    const auto& rule = document.at("label_rule");
    schema.label_rule = {rule.at("label_column").get<std::string>(), rule.at("positive_value").get<std::string>(),
                         rule.at("negative_value").get<std::string>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSchema, std::string("malformed schema: ") + e.what());
  }
  schema.validate();
  return schema;
}

EncodingSchema load_schema(const std::filesystem::path& path) {
  json doc = json::parse(read_text_file(path), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::InvalidSchema, "'" + path.string() + "' is not valid JSON");
  return schema_from_json(doc);
}

void save_schema(const EncodingSchema& schema, const std::filesystem::path& path) {
  write_text_file(path, schema_to_json(schema).dump(2) + "\n");
}

json dual_diagnostics(const qp::QpProblem<double>& problem, const qp::DualSolution<double>& solution) {
  json alphas = json::array();
  for (Eigen::Index i = 0; i < solution.alphas.size(); ++i) alphas.push_back(solution.alphas(i));
  return {{"alphas", alphas},
          {"offset", solution.offset},
          {"objective", solution.objective},
          {"kkt_violation", qp::kkt_violation(problem, solution)},
          {"iterations", solution.iterations},
          {"converged", solution.converged}};
}

}  // namespace clindiag
