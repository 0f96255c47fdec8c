#include "kvflow/snapshot.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace kvflow {

void write_snapshot(const std::string& path, const ManifoldData& man, const VectorFieldGrid& X) {
  if (X.size() != man.nodes * man.m)
    throw ValidationError("write_snapshot: field size does not match the manifold");
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw ValidationError("write_snapshot: cannot open " + tmp);
    out << "KVFLOW1 " << kind_name(man.spec.kind) << ' ' << man.m;
    for (int d = 0; d < man.m; ++d) out << ' ' << man.grid.n[d];
    out << '\n';
    char buf[32];
    for (long node = 0; node < man.nodes; ++node) {
      for (int i = 0; i < man.m; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", X[node * man.m + i]);
        if (i) out << ' ';
        out << buf;
      }
      out << '\n';
    }
    if (!out) throw ValidationError("write_snapshot: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ValidationError("write_snapshot: rename failed for " + path);
}

VectorFieldGrid read_snapshot(const std::string& path, const ManifoldData& man) {
  std::ifstream in(path);
  if (!in) throw ValidationError("read_snapshot: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("read_snapshot: empty file " + path);

  std::istringstream head(line);
  std::string magic, kind;
  int m = 0;
  head >> magic >> kind >> m;
  if (magic != "KVFLOW1")
    throw ValidationError("read_snapshot: bad magic in " + path + " (line 1)");
  if (kind != kind_name(man.spec.kind))
    throw ValidationError("read_snapshot: manifold kind mismatch in " + path + ": file has " +
                          kind + ", expected " + kind_name(man.spec.kind));
  if (m != man.m)
    throw ValidationError("read_snapshot: dimension mismatch in " + path);
  for (int d = 0; d < m; ++d) {
    int n = 0;
    head >> n;
    if (n != man.grid.n[d])
      throw ValidationError("read_snapshot: resolution mismatch in " + path);
  }

  VectorFieldGrid X(man.nodes * man.m);
  for (long node = 0; node < man.nodes; ++node) {
    if (!std::getline(in, line))
      throw ValidationError("read_snapshot: truncated at line " + std::to_string(node + 2) +
                            " of " + path);
    std::istringstream row(line);
    for (int i = 0; i < man.m; ++i) {
      if (!(row >> X[node * man.m + i]))
        throw ValidationError("read_snapshot: bad value at line " + std::to_string(node + 2) +
                              " of " + path);
    }
  }
  return X;
}

}  // namespace kvflow
