#include "sragan/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace sragan {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void check_int(const std::string& key, const std::string& value) {
  size_t pos = 0;
  bool ok = !value.empty();
  try {
    (void)std::stoll(value, &pos);
  } catch (const std::exception&) {
    ok = false;
  }
  if (!ok || pos != value.size())
    throw ConfigurationError("config: key '" + key + "' expects an integer, got '" + value + "'");
}

void check_float(const std::string& key, const std::string& value) {
  size_t pos = 0;
  bool ok = !value.empty();
  try {
    (void)std::stod(value, &pos);
  } catch (const std::exception&) {
    ok = false;
  }
  if (!ok || pos != value.size())
    throw ConfigurationError("config: key '" + key + "' expects a number, got '" + value + "'");
}

void check_choice(const std::string& key, const std::string& value, const std::set<std::string>& allowed) {
  if (!allowed.count(value)) {
    std::string opts;
    for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
    throw ConfigurationError("config: key '" + key + "' must be one of {" + opts + "}, got '" + value + "'");
  }
}

}  // namespace

const std::vector<ConfigKey>& RunConfig::schema() {
  static const std::vector<ConfigKey> keys = {
      {"run.name", "str", "run", "run directory name under the runs root"},
      {"data.root", "str", "", "dataset root containing trainX/trainY(/testX/testY)"},
      {"data.resize_to", "int", "256", "square side all images are resized to"},
      {"data.seed", "int", "0", "seed for standalone split/sampling operations"},
      {"data.batch_size", "int", "1", "training batch size"},
      {"saliency.backend", "str", "synthetic", "saliency detector backend: synthetic | pretrained"},
      {"saliency.weights_path", "str", "", "TorchScript weights file for the pretrained backend"},
      {"saliency.tau", "float", "0.1", "temperature of the soft threshold used inside losses"},
      {"gen.base_channels", "int", "64", "generator encoder width; downstream widths scale from it"},
      {"gen.n_bottleneck", "int", "9", "number of bottleneck blocks"},
      {"gen.sn_positions", "str", "alternate",
       "saliency-normalized block indices: 'alternate', 'none', or comma list like '0,2,4'"},
      {"trainer.epochs", "int", "200", "total training epochs"},
      {"trainer.lr", "float", "0.0002", "Adam learning rate before decay"},
      {"trainer.adam_beta1", "float", "0.5", "Adam beta1"},
      {"trainer.adam_beta2", "float", "0.999", "Adam beta2"},
      {"trainer.decay_start_epoch", "int", "100", "first epoch of the linear decay ramp"},
      {"trainer.pool_size", "int", "50", "replay pool capacity per domain (0 disables)"},
      {"trainer.lambda1", "float", "1", "weight of the adversarial loss"},
      {"trainer.lambda2", "float", "10", "weight of the cycle loss"},
      {"trainer.lambda3", "float", "5", "weight of the saliency structure loss"},
      {"trainer.ablation", "str", "",
       "comma set drawn from {no_siou, smse, no_sanorm, no_saadv}"},
      {"trainer.seed", "int", "0", "master seed; every training-time stream derives from it"},
      {"trainer.checkpoint_every", "int", "10", "epoch interval between numbered checkpoints"},
      {"eval.extractor", "str", "toy", "feature extractor backend: toy | inception"},
      {"eval.weights_path", "str", "", "TorchScript weights file for the inception backend"},
  };
  return keys;
}

RunConfig::RunConfig() {
  for (const auto& k : schema()) values_[k.name] = k.default_value;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigurationError("config: line " + std::to_string(lineno) + " is not 'key = value'");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const ConfigKey* entry = nullptr;
  for (const auto& k : schema())
    if (k.name == key) entry = &k;
  if (!entry) throw ConfigurationError("config: unknown key '" + key + "'");

  if (entry->type == "int") check_int(key, value);
  if (entry->type == "float") check_float(key, value);
  if (key == "saliency.backend") check_choice(key, value, {"synthetic", "pretrained"});
  if (key == "eval.extractor") check_choice(key, value, {"toy", "inception"});
  if (key == "trainer.ablation" && !value.empty()) {
    std::istringstream parts(value);
    std::string item;
    while (std::getline(parts, item, ','))
      check_choice(key, trim(item), {"no_siou", "smse", "no_sanorm", "no_saadv"});
  }
  values_[key] = value;
}

void RunConfig::set_pair(const std::string& pair) {
  const auto eq = pair.find('=');
  if (eq == std::string::npos)
    throw ConfigurationError("config: override '" + pair + "' is not of the form key=value");
  set(trim(pair.substr(0, eq)), trim(pair.substr(eq + 1)));
}

int64_t RunConfig::get_int(const std::string& key) const {
  return std::stoll(get_str(key));
}

double RunConfig::get_double(const std::string& key) const {
  return std::stod(get_str(key));
}

const std::string& RunConfig::get_str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigurationError("config: unknown key '" + key + "'");
  return it->second;
}

std::vector<std::string> RunConfig::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::istringstream parts(get_str(key));
  std::string item;
  while (std::getline(parts, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string RunConfig::snapshot() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::string RunConfig::describe_keys() {
  std::ostringstream os;
  os << "Config keys (key = value lines; override with --set key=value):\n";
  for (const auto& k : schema()) {
    std::string def = k.default_value.empty() ? "''" : k.default_value;
    os << "  " << k.name << " (" << k.type << ", default " << def << "): " << k.help << "\n";
  }
  return os.str();
}

}  // namespace sragan
