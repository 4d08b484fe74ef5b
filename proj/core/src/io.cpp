#include "bundlesight/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bundlesight/errors.hpp"

namespace bundlesight::io {

namespace {

using nlohmann::json;

std::string item_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end())
    throw SchemaError(path + "." + key, "missing required field");
  return *it;
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

long as_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  return j.get<long>();
}

std::uint64_t as_seed(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0)
    return static_cast<std::uint64_t>(j.get<long long>());
  throw SchemaError(path, "expected a non-negative integer");
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw SchemaError(path, "expected a boolean");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  return j;
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", e.what());
  }
}

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    rows.push_back(vec_to_json(m.row(r)));
  return rows;
}

Eigen::VectorXd vec_from_json(const json& j, const std::string& path) {
  const json& a = as_array(j, path);
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = as_double(a[i], item_path(path, i));
  return v;
}

Eigen::MatrixXd mat_from_json(const json& j, const std::string& path) {
  const json& rows = as_array(j, path);
  if (rows.empty()) throw SchemaError(path, "expected a non-empty matrix");
  Eigen::MatrixXd m;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Eigen::VectorXd row = vec_from_json(rows[r], item_path(path, r));
    if (r == 0) m.resize(rows.size(), row.size());
    if (row.size() != m.cols())
      throw SchemaError(item_path(path, r), "ragged matrix rows");
    m.row(static_cast<Eigen::Index>(r)) = row;
  }
  return m;
}

json bundle_to_json(const Bundle& bundle) {
  json a = json::array();
  for (auto bit : bundle.mask) a.push_back(static_cast<int>(bit));
  return a;
}

Bundle bundle_from_json(const json& j, const std::string& path) {
  const json& a = as_array(j, path);
  Bundle b;
  b.mask.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long bit = as_integer(a[i], item_path(path, i));
    if (bit != 0 && bit != 1)
      throw SchemaError(item_path(path, i), "mask entries must be 0 or 1");
    b.mask.push_back(static_cast<std::uint8_t>(bit));
  }
  return b;
}

json menu_to_json(const PriceMenu& menu) {
  json a = json::array();
  for (const auto& e : menu.entries)
    a.push_back({{"mask", bundle_to_json(e.bundle)}, {"price", e.price}});
  return a;
}

PriceMenu menu_from_json(const json& j, const std::string& path) {
  const json& a = as_array(j, path);
  PriceMenu menu;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::string at = item_path(path, i);
    MenuEntry e;
    e.bundle = bundle_from_json(require(a[i], "mask", at), at + ".mask");
    e.price = as_double(require(a[i], "price", at), at + ".price");
    menu.entries.push_back(std::move(e));
  }
  return menu;
}

json em_config_to_json(const EmConfig& config) {
  return {{"mc_samples", config.mc_samples},
          {"tolerance", config.tolerance},
          {"max_iterations", config.max_iterations},
          {"pool_size", config.pool_size},
          {"acceptance_threshold", config.acceptance_threshold},
          {"seed", config.seed}};
}

void fill_common_report(json& out, const FitReport& report) {
  out["iterations"] = report.iterations;
  out["error_trace"] = report.error_trace;
  out["converged"] = report.converged;
  out["seed"] = report.seed;
  out["runtime_seconds"] = report.runtime_seconds;
  out["fallback_batches"] = report.fallback_batches;
  out["config"] = em_config_to_json(report.config);
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot open file for writing: " + path);
  out << text;
  if (!out) throw InvalidInputError("failed writing file: " + path);
}

std::string dataset_to_json(const Dataset& dataset) {
  json txns = json::array();
  for (const auto& txn : dataset.transactions)
    txns.push_back({{"menu", menu_to_json(txn.menu)}, {"choice", txn.choice}});
  const json out = {{"product_count", dataset.product_count},
                    {"transactions", txns}};
  return out.dump(2) + "\n";
}

Dataset dataset_from_json(const std::string& text) {
  const json j = parse(text);
  Dataset dataset;
  dataset.product_count = static_cast<int>(
      as_integer(require(j, "product_count", "$"), "product_count"));
  const json& txns =
      as_array(require(j, "transactions", "$"), "transactions");
  for (std::size_t n = 0; n < txns.size(); ++n) {
    const std::string at = item_path("transactions", n);
    Transaction txn;
    txn.menu = menu_from_json(require(txns[n], "menu", at), at + ".menu");
    txn.choice = static_cast<int>(
        as_integer(require(txns[n], "choice", at), at + ".choice"));
    dataset.transactions.push_back(std::move(txn));
  }
  try {
    validate(dataset);
  } catch (const InvalidInputError& e) {
    throw SchemaError("$", e.what());
  }
  return dataset;
}

std::string censored_to_json(const CensoredDataset& dataset) {
  json menus = json::array();
  for (const auto& block : dataset.menus)
    menus.push_back(
        {{"menu", menu_to_json(block.menu)}, {"counts", block.counts}});
  const json out = {{"product_count", dataset.product_count},
                    {"menus", menus}};
  return out.dump(2) + "\n";
}

CensoredDataset censored_from_json(const std::string& text) {
  const json j = parse(text);
  CensoredDataset dataset;
  dataset.product_count = static_cast<int>(
      as_integer(require(j, "product_count", "$"), "product_count"));
  const json& menus = as_array(require(j, "menus", "$"), "menus");
  for (std::size_t m = 0; m < menus.size(); ++m) {
    const std::string at = item_path("menus", m);
    CensoredMenuBlock block;
    block.menu = menu_from_json(require(menus[m], "menu", at), at + ".menu");
    const json& counts =
        as_array(require(menus[m], "counts", at), at + ".counts");
    for (std::size_t c = 0; c < counts.size(); ++c)
      block.counts.push_back(
          as_integer(counts[c], item_path(at + ".counts", c)));
    dataset.menus.push_back(std::move(block));
  }
  try {
    validate(dataset);
  } catch (const InvalidInputError& e) {
    throw SchemaError("$", e.what());
  }
  return dataset;
}

Dataset dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto fields_of = [](const std::string& s) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream fs(s);
    while (std::getline(fs, field, ',')) fields.push_back(field);
    if (!s.empty() && s.back() == ',') fields.emplace_back();
    return fields;
  };
  if (!std::getline(in, line))
    throw SchemaError("line 1", "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++line_no;
  if (line != "txn_id,bundle_mask,price,chosen")
    throw SchemaError("line 1",
                      "expected header 'txn_id,bundle_mask,price,chosen'");

  Dataset dataset;
  std::map<std::string, std::size_t> txn_index;
  std::vector<bool> has_choice;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string at = "line " + std::to_string(line_no);
    const auto fields = fields_of(line);
    if (fields.size() != 4)
      throw SchemaError(at, "expected 4 comma-separated fields");
    Bundle bundle;
    try {
      bundle = Bundle::from_bitstring(fields[1]);
    } catch (const InvalidInputError& e) {
      throw SchemaError(at + ".bundle_mask", e.what());
    }
    if (dataset.product_count == 0)
      dataset.product_count = bundle.product_count();
    double price = 0.0;
    try {
      std::size_t used = 0;
      price = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw SchemaError(at + ".price", "expected a number");
    }
    if (fields[3] != "0" && fields[3] != "1")
      throw SchemaError(at + ".chosen", "expected 0 or 1");

    const auto [it, inserted] =
        txn_index.try_emplace(fields[0], dataset.transactions.size());
    if (inserted) {
      dataset.transactions.emplace_back();
      has_choice.push_back(false);
    }
    Transaction& txn = dataset.transactions[it->second];
    txn.menu.entries.push_back({std::move(bundle), price});
    if (fields[3] == "1") {
      if (has_choice[it->second])
        throw SchemaError(at + ".chosen",
                          "transaction '" + fields[0] +
                              "' marks more than one row as chosen");
      has_choice[it->second] = true;
      txn.choice = txn.menu.size();
    }
  }
  try {
    validate(dataset);
  } catch (const InvalidInputError& e) {
    throw SchemaError("$", e.what());
  }
  return dataset;
}

std::string truth_to_json(const GroundTruth& truth) {
  json out = {{"kind", truth.kind == TruthKind::kGaussian ? "gaussian"
                                                          : "gumbel"},
              {"mu", vec_to_json(truth.gaussian.mu)},
              {"sigma", mat_to_json(truth.gaussian.sigma)}};
  if (truth.kind == TruthKind::kGumbel)
    out["gumbel_scale"] = vec_to_json(truth.gumbel_scale);
  return out.dump(2) + "\n";
}

GroundTruth truth_from_json(const std::string& text) {
  const json j = parse(text);
  GroundTruth truth;
  const std::string kind = as_string(require(j, "kind", "$"), "kind");
  if (kind == "gaussian")
    truth.kind = TruthKind::kGaussian;
  else if (kind == "gumbel")
    truth.kind = TruthKind::kGumbel;
  else
    throw SchemaError("kind", "expected 'gaussian' or 'gumbel'");
  truth.gaussian.mu = vec_from_json(require(j, "mu", "$"), "mu");
  truth.gaussian.sigma = mat_from_json(require(j, "sigma", "$"), "sigma");
  if (truth.kind == TruthKind::kGumbel)
    truth.gumbel_scale =
        vec_from_json(require(j, "gumbel_scale", "$"), "gumbel_scale");
  try {
    validate(truth.gaussian, "truth");
  } catch (const InvalidInputError& e) {
    throw SchemaError("$", e.what());
  }
  return truth;
}

std::string fit_report_to_json(const FitReport& report,
                               const std::string& method) {
  json out = {{"method", method},
              {"mu", vec_to_json(report.params.mu)},
              {"sigma", mat_to_json(report.params.sigma)}};
  fill_common_report(out, report);
  return out.dump(2) + "\n";
}

GaussianParams params_from_json(const std::string& text) {
  const json j = parse(text);
  GaussianParams params;
  params.mu = vec_from_json(require(j, "mu", "$"), "mu");
  params.sigma = mat_from_json(require(j, "sigma", "$"), "sigma");
  try {
    validate(params);
  } catch (const InvalidInputError& e) {
    throw SchemaError("$", e.what());
  }
  return params;
}

std::string gmm_report_to_json(const GmmFitReport& report) {
  json components = json::array();
  for (const auto& c : report.params.components)
    components.push_back({{"weight", c.weight},
                          {"mu", vec_to_json(c.params.mu)},
                          {"sigma", mat_to_json(c.params.sigma)}});
  json out = {{"method", "em_gmm"},
              {"components", components},
              {"uniform_rows", report.uniform_rows}};
  out["iterations"] = report.iterations;
  out["error_trace"] = report.error_trace;
  out["converged"] = report.converged;
  out["seed"] = report.seed;
  out["runtime_seconds"] = report.runtime_seconds;
  out["fallback_batches"] = report.fallback_batches;
  out["config"] = em_config_to_json(report.config.em);
  out["config"]["components"] = report.config.components;
  out["config"]["weight_floor"] = report.config.weight_floor;
  return out.dump(2) + "\n";
}

GmmParams gmm_params_from_json(const std::string& text) {
  const json j = parse(text);
  GmmParams params;
  const json& components =
      as_array(require(j, "components", "$"), "components");
  for (std::size_t k = 0; k < components.size(); ++k) {
    const std::string at = item_path("components", k);
    GmmComponent c;
    c.weight = as_double(require(components[k], "weight", at), at + ".weight");
    c.params.mu =
        vec_from_json(require(components[k], "mu", at), at + ".mu");
    c.params.sigma =
        mat_from_json(require(components[k], "sigma", at), at + ".sigma");
    params.components.push_back(std::move(c));
  }
  try {
    validate(params);
  } catch (const InvalidInputError& e) {
    throw SchemaError("$", e.what());
  }
  return params;
}

std::string mnl_to_json(const MnlParams& params) {
  json alts = json::array();
  for (std::size_t a = 0; a < params.alternatives.size(); ++a)
    alts.push_back(
        {{"mask", bundle_to_json(params.alternatives[a])},
         {"intercept", params.intercepts[static_cast<Eigen::Index>(a)]}});
  const json out = {{"method", "mnl"},
                    {"alternatives", alts},
                    {"price_coefficient", params.price_coefficient},
                    {"iterations", params.iterations},
                    {"converged", params.converged},
                    {"ridged", params.ridged},
                    {"final_grad_norm", params.final_grad_norm}};
  return out.dump(2) + "\n";
}

MnlParams mnl_from_json(const std::string& text) {
  const json j = parse(text);
  MnlParams params;
  const json& alts =
      as_array(require(j, "alternatives", "$"), "alternatives");
  params.intercepts.resize(static_cast<Eigen::Index>(alts.size()));
  for (std::size_t a = 0; a < alts.size(); ++a) {
    const std::string at = item_path("alternatives", a);
    params.alternatives.push_back(
        bundle_from_json(require(alts[a], "mask", at), at + ".mask"));
    params.intercepts[static_cast<Eigen::Index>(a)] =
        as_double(require(alts[a], "intercept", at), at + ".intercept");
  }
  params.price_coefficient = as_double(
      require(j, "price_coefficient", "$"), "price_coefficient");
  if (j.contains("iterations"))
    params.iterations =
        static_cast<int>(as_integer(j["iterations"], "iterations"));
  if (j.contains("converged"))
    params.converged = as_bool(j["converged"], "converged");
  if (j.contains("ridged")) params.ridged = as_bool(j["ridged"], "ridged");
  if (j.contains("final_grad_norm"))
    params.final_grad_norm =
        as_double(j["final_grad_norm"], "final_grad_norm");
  return params;
}

std::string mh_report_to_json(const MhReport& report) {
  const json out = {{"method", "mh"},
                    {"posterior_mean", vec_to_json(report.posterior_mean)},
                    {"acceptance_rate", report.acceptance_rate},
                    {"runtime_seconds", report.runtime_seconds}};
  return out.dump(2) + "\n";
}

std::string grid_report_to_json(const GridReport& report) {
  const json out = {{"method", "grid"},
                    {"posterior_mean", vec_to_json(report.posterior_mean)},
                    {"map_point", vec_to_json(report.map_point)},
                    {"max_log_likelihood", report.max_log_likelihood}};
  return out.dump(2) + "\n";
}

std::string detect_method(const std::string& text) {
  const json j = parse(text);
  if (!j.is_object() || !j.contains("method") || !j["method"].is_string())
    return "";
  return j["method"].get<std::string>();
}

GenSpec genspec_from_json(const std::string& text) {
  const json j = parse(text);
  if (!j.is_object()) throw SchemaError("$", "expected an object");
  static const std::set<std::string> known = {
      "product_count",   "n_transactions", "truth",
      "menu_mode",       "consideration_prob", "bundle_sizes",
      "fixed_menu_count", "bundles_per_menu", "price_halfwidth",
      "discount_lo",     "discount_hi",    "censor",
      "seed",            "menus",          "mu",
      "sigma"};
  for (const auto& [key, value] : j.items())
    if (known.find(key) == known.end())
      throw SchemaError(key, "unknown field");

  GenSpec spec;
  if (j.contains("product_count"))
    spec.product_count = static_cast<int>(
        as_integer(j["product_count"], "product_count"));
  if (j.contains("n_transactions"))
    spec.n_transactions = static_cast<int>(
        as_integer(j["n_transactions"], "n_transactions"));
  if (j.contains("truth")) {
    const std::string kind = as_string(j["truth"], "truth");
    if (kind == "gaussian")
      spec.truth = TruthKind::kGaussian;
    else if (kind == "gumbel")
      spec.truth = TruthKind::kGumbel;
    else
      throw SchemaError("truth", "expected 'gaussian' or 'gumbel'");
  }
  if (j.contains("menu_mode")) {
    const std::string mode = as_string(j["menu_mode"], "menu_mode");
    if (mode == "random")
      spec.menu_mode = MenuMode::kRandomPerTransaction;
    else if (mode == "fixed")
      spec.menu_mode = MenuMode::kFixedMenus;
    else
      throw SchemaError("menu_mode", "expected 'random' or 'fixed'");
  }
  if (j.contains("consideration_prob"))
    spec.consideration_prob =
        as_double(j["consideration_prob"], "consideration_prob");
  if (j.contains("bundle_sizes")) {
    spec.bundle_sizes.clear();
    const json& sizes = as_array(j["bundle_sizes"], "bundle_sizes");
    for (std::size_t i = 0; i < sizes.size(); ++i)
      spec.bundle_sizes.push_back(static_cast<int>(
          as_integer(sizes[i], item_path("bundle_sizes", i))));
  }
  if (j.contains("fixed_menu_count"))
    spec.fixed_menu_count = static_cast<int>(
        as_integer(j["fixed_menu_count"], "fixed_menu_count"));
  if (j.contains("bundles_per_menu"))
    spec.bundles_per_menu = static_cast<int>(
        as_integer(j["bundles_per_menu"], "bundles_per_menu"));
  if (j.contains("price_halfwidth"))
    spec.price_halfwidth = as_double(j["price_halfwidth"], "price_halfwidth");
  if (j.contains("discount_lo"))
    spec.discount_lo = as_double(j["discount_lo"], "discount_lo");
  if (j.contains("discount_hi"))
    spec.discount_hi = as_double(j["discount_hi"], "discount_hi");
  if (j.contains("censor")) spec.censor = as_bool(j["censor"], "censor");
  if (j.contains("seed")) spec.seed = as_seed(j["seed"], "seed");
  if (j.contains("menus")) {
    const json& menus = as_array(j["menus"], "menus");
    for (std::size_t m = 0; m < menus.size(); ++m)
      spec.explicit_menus.push_back(
          menu_from_json(menus[m], item_path("menus", m)));
  }
  if (j.contains("mu") != j.contains("sigma"))
    throw SchemaError("mu", "manual truth needs both 'mu' and 'sigma'");
  if (j.contains("mu")) {
    spec.manual_mu = vec_from_json(j["mu"], "mu");
    spec.manual_sigma = mat_from_json(j["sigma"], "sigma");
  }
  return spec;
}

std::string trace_to_csv(const std::vector<double>& errors) {
  std::string out = "iteration,error\n";
  char buf[64];
  for (std::size_t i = 0; i < errors.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, errors[i]);
    out += buf;
  }
  return out;
}

}  // namespace bundlesight::io
