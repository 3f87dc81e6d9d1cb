#include "bizol/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "bizol/rng.hpp"

namespace bizol {

namespace {

constexpr int kSchemaVersion = 1;

void require_field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) {
    throw std::runtime_error("missing field \"" + std::string(key) + "\" in " + where);
  }
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

bool Scenario::operator==(const Scenario& other) const {
  return nodes == other.nodes && p_target == other.p_target && rho == other.rho &&
         lambda_lower.size() == other.lambda_lower.size() &&
         lambda_upper.size() == other.lambda_upper.size() &&
         (lambda_lower.array() == other.lambda_lower.array()).all() &&
         (lambda_upper.array() == other.lambda_upper.array()).all();
}

Scenario generate_scenario(const GenerateParams& p) {
  if (p.n_nodes < 1) throw std::invalid_argument("n_nodes must be >= 1");
  if (p.n_users < 1) throw std::invalid_argument("n_users must be >= 1");
  if (p.devices_per_user < 1) throw std::invalid_argument("devices_per_user must be >= 1");
  if (!(p.alpha_range.lo > 0.0) || !(p.alpha_range.lo < p.alpha_range.hi)) {
    throw std::invalid_argument("alpha_range must be nonempty with positive lower bound");
  }
  if (!(p.capacity_range.lo > 0.0) || !(p.capacity_range.lo < p.capacity_range.hi)) {
    throw std::invalid_argument("capacity_range must be nonempty with positive lower bound");
  }
  if (!(p.lambda_box.lo <= p.lambda_box.hi)) {
    throw std::invalid_argument("lambda_box must be nonempty");
  }
  if (!(p.rho > 0.0)) throw std::invalid_argument("rho must be > 0");
  if (!(p.target_fraction > 0.0 && p.target_fraction < 1.0)) {
    throw std::invalid_argument("target_fraction must be in (0, 1)");
  }

  Rng rng(p.seed);

  Scenario s;
  s.rho = p.rho;
  s.nodes.resize(static_cast<std::size_t>(p.n_nodes));
  for (int i = 0; i < p.n_nodes; ++i) {
    s.nodes[static_cast<std::size_t>(i)].node_id = "n" + std::to_string(i);
  }

  // Users land on uniformly random nodes, then draw their device parameters
  // in user order so the stream layout is stable.
  std::vector<int> node_of(static_cast<std::size_t>(p.n_users));
  for (int u = 0; u < p.n_users; ++u) {
    node_of[static_cast<std::size_t>(u)] =
        static_cast<int>(rng.next_below(static_cast<std::uint64_t>(p.n_nodes)));
  }
  for (int u = 0; u < p.n_users; ++u) {
    UserSpec user;
    user.user_id = "u" + std::to_string(u);
    user.devices.reserve(static_cast<std::size_t>(p.devices_per_user));
    for (int d = 0; d < p.devices_per_user; ++d) {
      DeviceParams dev;
      dev.alpha = rng.uniform(p.alpha_range.lo, p.alpha_range.hi);
      dev.capacity = rng.uniform(p.capacity_range.lo, p.capacity_range.hi);
      dev.activation_cost = 0.0;
      user.devices.push_back(dev);
    }
    s.nodes[static_cast<std::size_t>(node_of[static_cast<std::size_t>(u)])].users.push_back(
        std::move(user));
  }

  double total_baseline = 0.0;
  for (auto& node : s.nodes) {
    double cap = 0.0;
    for (const auto& user : node.users) {
      for (const auto& dev : user.devices) cap += dev.capacity;
    }
    node.baseline_load = cap * rng.uniform(1.0, 2.0);
    total_baseline += node.baseline_load;
  }
  s.p_target = p.target_fraction * total_baseline;

  s.lambda_lower = Eigen::VectorXd::Constant(p.n_nodes, p.lambda_box.lo);
  s.lambda_upper = Eigen::VectorXd::Constant(p.n_nodes, p.lambda_box.hi);
  return s;
}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> v;
  if (s.nodes.empty()) v.push_back("scenario has no nodes");
  if (!(s.rho > 0.0)) {
    v.push_back("rho must be > 0 (got " + std::to_string(s.rho) + ")");
  }
  const auto n = static_cast<Eigen::Index>(s.nodes.size());
  if (s.lambda_lower.size() != n || s.lambda_upper.size() != n) {
    v.push_back("lambda bounds must have one entry per node");
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(s.lambda_lower[i] <= s.lambda_upper[i])) {
        v.push_back("node " + s.nodes[static_cast<std::size_t>(i)].node_id + " (index " +
                    std::to_string(i) + "): lambda_lower > lambda_upper");
      }
    }
  }
  std::vector<std::string> seen_users;
  for (const auto& node : s.nodes) {
    if (!(node.baseline_load >= 0.0)) {
      v.push_back("node " + node.node_id + ": baseline_load must be >= 0");
    }
    for (const auto& user : node.users) {
      seen_users.push_back(user.user_id);
      if (user.devices.empty()) {
        v.push_back("node " + node.node_id + " user " + user.user_id + ": no devices");
      }
      for (std::size_t d = 0; d < user.devices.size(); ++d) {
        const auto& dev = user.devices[d];
        const std::string where =
            "node " + node.node_id + " user " + user.user_id + " device " + std::to_string(d);
        if (!(dev.alpha > 0.0)) v.push_back(where + ": alpha must be > 0");
        if (!(dev.capacity > 0.0)) v.push_back(where + ": capacity must be > 0");
        if (!(dev.activation_cost >= 0.0)) v.push_back(where + ": activation_cost must be >= 0");
      }
    }
  }
  std::sort(seen_users.begin(), seen_users.end());
  for (std::size_t i = 1; i < seen_users.size(); ++i) {
    if (seen_users[i] == seen_users[i - 1]) {
      v.push_back("duplicate user_id \"" + seen_users[i] + "\"");
    }
  }
  return v;
}

std::string scenario_to_json(const Scenario& s) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["p_target"] = s.p_target;
  j["rho"] = s.rho;
  j["lambda_lower"] = to_std(s.lambda_lower);
  j["lambda_upper"] = to_std(s.lambda_upper);
  j["nodes"] = nlohmann::json::array();
  for (const auto& node : s.nodes) {
    nlohmann::json jn;
    jn["node_id"] = node.node_id;
    jn["baseline_load"] = node.baseline_load;
    jn["users"] = nlohmann::json::array();
    for (const auto& user : node.users) {
      nlohmann::json ju;
      ju["user_id"] = user.user_id;
      ju["devices"] = nlohmann::json::array();
      for (const auto& dev : user.devices) {
        ju["devices"].push_back({{"alpha", dev.alpha},
                                 {"capacity", dev.capacity},
                                 {"activation_cost", dev.activation_cost}});
      }
      jn["users"].push_back(std::move(ju));
    }
    j["nodes"].push_back(std::move(jn));
  }
  return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed scenario document: ") + e.what());
  }
  for (const char* key : {"schema_version", "nodes", "p_target", "rho", "lambda_lower",
                          "lambda_upper"}) {
    require_field(j, key, "scenario");
  }
  Scenario s;
  s.p_target = j.at("p_target").get<double>();
  s.rho = j.at("rho").get<double>();
  s.lambda_lower = to_eigen(j.at("lambda_lower").get<std::vector<double>>());
  s.lambda_upper = to_eigen(j.at("lambda_upper").get<std::vector<double>>());
  for (const auto& jn : j.at("nodes")) {
    require_field(jn, "node_id", "node");
    require_field(jn, "baseline_load", "node");
    require_field(jn, "users", "node");
    NodeSpec node;
    node.node_id = jn.at("node_id").get<std::string>();
    node.baseline_load = jn.at("baseline_load").get<double>();
    for (const auto& ju : jn.at("users")) {
      require_field(ju, "user_id", "user");
      require_field(ju, "devices", "user");
      UserSpec user;
      user.user_id = ju.at("user_id").get<std::string>();
      for (const auto& jd : ju.at("devices")) {
        require_field(jd, "alpha", "device");
        require_field(jd, "capacity", "device");
        DeviceParams dev;
        dev.alpha = jd.at("alpha").get<double>();
        dev.capacity = jd.at("capacity").get<double>();
        dev.activation_cost = jd.value("activation_cost", 0.0);
        user.devices.push_back(dev);
      }
      node.users.push_back(std::move(user));
    }
    s.nodes.push_back(std::move(node));
  }
  const auto violations = validate_scenario(s);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "scenario fails validation:";
    for (const auto& item : violations) msg << "\n  - " << item;
    throw std::runtime_error(msg.str());
  }
  return s;
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << scenario_to_json(s);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

std::uint64_t scenario_hash(const Scenario& s) {
  const std::string text = scenario_to_json(s);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace bizol
