#include "subfinsler/spec_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace subfinsler {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const char* where, std::initializer_list<const char*> required,
                std::initializer_list<const char*> optional = {}) {
  for (const char* key : required)
    if (!obj.contains(key))
      throw SchemaError(std::string(where) + ": missing field '" + key + "'");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : required) known = known || it.key() == key;
    for (const char* key : optional) known = known || it.key() == key;
    if (!known)
      throw SchemaError(std::string(where) + ": unexpected field '" + it.key() + "'");
  }
}

Eigen::VectorXd parse_vector(const json& arr, int size, const char* where) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != size)
    throw SchemaError(std::string(where) + " must be an array of " + std::to_string(size) +
                      " numbers");
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) {
    if (!arr[static_cast<std::size_t>(i)].is_number())
      throw SchemaError(std::string(where) + " must contain numbers");
    v[i] = arr[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

Eigen::MatrixXd parse_matrix(const json& arr, int k, const char* where) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != k)
    throw SchemaError(std::string(where) + " must be a " + std::to_string(k) + "x" +
                      std::to_string(k) + " matrix");
  Eigen::MatrixXd M(k, k);
  for (int i = 0; i < k; ++i)
    M.row(i) = parse_vector(arr[static_cast<std::size_t>(i)], k, where).transpose();
  return M;
}

MinkowskiNorm parse_norm(const json& obj, int k) {
  if (!obj.is_object()) throw SchemaError("norm must be an object");
  if (!obj.contains("type") || !obj["type"].is_string())
    throw SchemaError("norm: missing string field 'type'");
  std::string type = obj["type"].get<std::string>();
  if (type == "euclidean") {
    check_keys(obj, "norm", {"type"});
    return MinkowskiNorm::euclidean(k);
  }
  if (type == "quadratic") {
    check_keys(obj, "norm", {"type", "G"});
    return MinkowskiNorm::quadratic(parse_matrix(obj["G"], k, "norm.G"));
  }
  if (type == "randers") {
    check_keys(obj, "norm", {"type", "G", "b"});
    return MinkowskiNorm::randers(parse_matrix(obj["G"], k, "norm.G"),
                                  parse_vector(obj["b"], k, "norm.b"));
  }
  throw SchemaError("norm.type must be one of euclidean, quadratic, randers");
}

}  // namespace

ManifoldSpec parse_manifold_spec(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("document must be a JSON object");
  check_keys(doc, "document", {"dim", "frames", "norm"}, {"domain"});

  if (!doc["dim"].is_number_integer()) throw SchemaError("dim must be an integer");
  const int n = doc["dim"].get<int>();
  if (n < 1) throw ValidationError("dim must be >= 1");

  if (!doc["frames"].is_array() || doc["frames"].empty())
    throw SchemaError("frames must be a non-empty array");
  const int k = static_cast<int>(doc["frames"].size());

  std::vector<std::vector<ExprPtr>> frames;
  frames.reserve(static_cast<std::size_t>(k));
  for (int a = 0; a < k; ++a) {
    const json& row = doc["frames"][static_cast<std::size_t>(a)];
    if (!row.is_array())
      throw SchemaError("frames[" + std::to_string(a) + "] must be an array of strings");
    if (static_cast<int>(row.size()) != n)
      throw ValidationError("frame " + std::to_string(a + 1) + " must have n = " +
                            std::to_string(n) + " component expressions");
    std::vector<ExprPtr> comps;
    comps.reserve(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
      const json& cell = row[static_cast<std::size_t>(m)];
      if (!cell.is_string())
        throw SchemaError("frames[" + std::to_string(a) + "][" + std::to_string(m) +
                          "] must be an expression string");
      try {
        comps.push_back(parse_expr(cell.get<std::string>()));
      } catch (const SyntaxError& e) {
        throw ValidationError("frame " + std::to_string(a + 1) + " component " +
                              std::to_string(m + 1) + ": " + e.what());
      } catch (const UnknownIdentifier& e) {
        throw ValidationError("frame " + std::to_string(a + 1) + " component " +
                              std::to_string(m + 1) + ": " + e.what());
      }
    }
    frames.push_back(std::move(comps));
  }

  std::optional<DomainBox> domain;
  if (doc.contains("domain")) {
    const json& d = doc["domain"];
    if (!d.is_object()) throw SchemaError("domain must be an object");
    check_keys(d, "domain", {"min", "max"});
    domain = DomainBox{parse_vector(d["min"], n, "domain.min"),
                       parse_vector(d["max"], n, "domain.max")};
  }

  MinkowskiNorm norm = parse_norm(doc["norm"], k);
  return ManifoldSpec(n, std::move(frames), std::move(norm), std::move(domain));
}

ManifoldSpec load_manifold_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open spec file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifold_spec(buf.str());
}

}  // namespace subfinsler
