#include "kvflow/config.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace kvflow {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& path, int line, const std::string& what) {
  throw ValidationError("config " + path + " line " + std::to_string(line) + ": " + what);
}

struct Value {
  std::string path;
  int line;
  std::string key;
  std::string text;

  double as_double() const {
    try {
      size_t used = 0;
      double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      fail(path, line, "key '" + key + "' needs a number, got '" + text + "'");
    }
  }

  long as_long() const {
    try {
      size_t used = 0;
      long v = std::stol(text, &used);
      if (used != text.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      fail(path, line, "key '" + key + "' needs an integer, got '" + text + "'");
    }
  }

  unsigned long long as_u64() const {
    try {
      size_t used = 0;
      unsigned long long v = std::stoull(text, &used);
      if (used != text.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      fail(path, line, "key '" + key + "' needs an unsigned integer, got '" + text + "'");
    }
  }

  bool as_bool() const {
    if (text == "yes" || text == "true" || text == "on" || text == "1") return true;
    if (text == "no" || text == "false" || text == "off" || text == "0") return false;
    fail(path, line, "key '" + key + "' needs yes/no, got '" + text + "'");
  }
};

FourierTerm parse_term(const Value& v) {
  std::istringstream in(v.text);
  FourierTerm t;
  std::string extra;
  if (!(in >> t.k0 >> t.k1 >> t.component >> t.phase >> t.amplitude) || (in >> extra))
    fail(v.path, v.line,
         "key '" + v.key + "' needs five fields 'k0 k1 component phase amplitude', got '" +
             v.text + "'");
  return t;
}

bool is_term_key(const std::string& key) {
  if (key.size() < 5 || key.compare(0, 4, "term") != 0) return false;
  for (size_t i = 4; i < key.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(key[i]))) return false;
  return key[4] != '0';
}

}  // namespace

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path);

  RunConfig cfg;
  cfg.path = path;
  bool have_kind = false, have_n0 = false, have_n1 = false, have_n2 = false;
  bool have_amp = false;

  std::string section;
  std::set<std::string> seen;  // "section/key", terms excluded
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (size_t hash = s.find('#'); hash != std::string::npos) s.resize(hash);
    s = trim(s);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') fail(path, line, "unterminated section header '" + s + "'");
      section = s.substr(1, s.size() - 2);
      if (section != "manifold" && section != "flow" && section != "initial" &&
          section != "output" && section != "operator")
        fail(path, line, "unknown section [" + section + "]");
      continue;
    }

    size_t eq = s.find('=');
    if (eq == std::string::npos) fail(path, line, "expected 'key = value', got '" + s + "'");
    std::string key = trim(s.substr(0, eq));
    std::string text = trim(s.substr(eq + 1));
    if (key.empty()) fail(path, line, "empty key");
    if (text.empty()) fail(path, line, "key '" + key + "' has no value");
    if (section.empty()) fail(path, line, "key '" + key + "' appears before any section");

    Value v{path, line, key, text};
    const bool term = section == "initial" && is_term_key(key);
    // The term list is a family of distinct keys; the same termN twice is
    // still a repeat.
    if (!seen.insert(section + "/" + key).second)
      fail(path, line, "repeated key '" + key + "' in [" + section + "]");

    if (section == "manifold") {
      if (key == "kind") {
        try {
          cfg.manifold.kind = kind_from_name(text);
        } catch (const ValidationError& e) {
          fail(path, line, e.what());
        }
        have_kind = true;
      } else if (key == "n0") {
        cfg.manifold.resolution[0] = static_cast<int>(v.as_long());
        have_n0 = true;
      } else if (key == "n1") {
        cfg.manifold.resolution[1] = static_cast<int>(v.as_long());
        have_n1 = true;
      } else if (key == "n2") {
        cfg.manifold.resolution[2] = static_cast<int>(v.as_long());
        have_n2 = true;
      } else if (key == "amplitude") {
        cfg.manifold.perturbation_amplitude = v.as_double();
        have_amp = true;
      } else {
        fail(path, line, "unknown key '" + key + "' in [manifold]");
      }
    } else if (section == "flow") {
      if (key == "variant") {
        try {
          cfg.flow.variant = variant_from_name(text);
        } catch (const ValidationError& e) {
          fail(path, line, e.what());
        }
      } else if (key == "integrator") {
        try {
          cfg.flow.integrator = integrator_from_name(text);
        } catch (const ValidationError& e) {
          fail(path, line, e.what());
        }
      } else if (key == "dt_safety") {
        cfg.flow.dt_safety = v.as_double();
      } else if (key == "t_end") {
        cfg.flow.t_end = v.as_double();
      } else if (key == "k_max") {
        cfg.flow.k_max = static_cast<int>(v.as_long());
      } else if (key == "monitor_stride") {
        cfg.flow.monitor_stride = v.as_long();
      } else if (key == "checkpoint_stride") {
        cfg.flow.checkpoint_stride = v.as_long();
      } else if (key == "require_convergence") {
        cfg.flow.require_convergence = v.as_bool();
      } else {
        fail(path, line, "unknown key '" + key + "' in [flow]");
      }
    } else if (section == "initial") {
      if (key == "kind") {
        cfg.initial.kind = text;
      } else if (key == "direction") {
        cfg.initial.direction = text;
      } else if (key == "scalar") {
        cfg.initial.scalar = text;
      } else if (key == "plus_killing_amp") {
        cfg.initial.plus_killing_amp = v.as_double();
      } else if (key == "seed") {
        cfg.initial.seed = v.as_u64();
      } else if (key == "path") {
        cfg.initial.path = text;
      } else if (key == "scale") {
        cfg.initial.scale = v.as_double();
      } else if (term) {
        cfg.initial.terms.push_back(parse_term(v));
      } else {
        fail(path, line, "unknown key '" + key + "' in [initial]");
      }
    } else if (section == "output") {
      if (key == "directory") {
        cfg.output.directory = text;
      } else if (key == "snapshot_final") {
        cfg.output.snapshot_final = v.as_bool();
      } else {
        fail(path, line, "unknown key '" + key + "' in [output]");
      }
    } else {  // operator
      if (key == "kernel_tol") {
        cfg.op.kernel_tol = v.as_double();
        cfg.flow.kernel_tol = cfg.op.kernel_tol;
      } else if (key == "spectrum_count") {
        cfg.op.spectrum_count = static_cast<int>(v.as_long());
      } else {
        fail(path, line, "unknown key '" + key + "' in [operator]");
      }
    }
  }

  if (!have_kind) throw ValidationError("config " + path + ": [manifold] kind is required");
  if (!have_n0 || !have_n1)
    throw ValidationError("config " + path + ": [manifold] n0 and n1 are required");
  if (cfg.manifold.kind == ManifoldKind::unit_sphere_s3 && !have_n2)
    throw ValidationError("config " + path + ": [manifold] n2 is required for unit_sphere_s3");
  if (have_n2 && cfg.manifold.kind != ManifoldKind::unit_sphere_s3)
    throw ValidationError("config " + path + ": [manifold] n2 only applies to unit_sphere_s3");
  if (have_amp && cfg.manifold.kind != ManifoldKind::perturbed_torus)
    throw ValidationError("config " + path +
                          ": [manifold] amplitude only applies to perturbed_torus");
  if (cfg.initial.kind == "file" && cfg.initial.path.empty())
    throw ValidationError("config " + path + ": [initial] kind file needs a path");
  return cfg;
}

}  // namespace kvflow
