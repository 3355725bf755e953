#include "rieszlab/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rieszlab {

static_assert(std::endian::native == std::endian::little,
              "RLGF files are little-endian; big-endian hosts need swapping");

static constexpr std::size_t kHeaderSize = 32;
static constexpr char kMagic[] = "RLGF ";

void write_rlgf(const std::string& path, const GridFunction& f) {
  char header[kHeaderSize] = {0};
  std::memcpy(header, kMagic, 5);
  char body[64];
  int len = std::snprintf(body, sizeof(body), "%d %d %.17g", f.grid.d,
                          f.grid.n, f.grid.side);
  if (len < 0 || static_cast<std::size_t>(len) > kHeaderSize - 5)
    throw std::runtime_error("write_rlgf: grid description does not fit the header");
  std::memcpy(header + 5, body, static_cast<std::size_t>(len));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_rlgf: cannot open " + path);
  out.write(header, kHeaderSize);
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write_rlgf: short write to " + path);
}

GridFunction read_rlgf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_rlgf: cannot open " + path);
  char header[kHeaderSize + 1] = {0};
  in.read(header, kHeaderSize);
  if (!in || std::memcmp(header, kMagic, 5) != 0)
    throw std::runtime_error("read_rlgf: bad magic in " + path);
  int d = 0, n = 0;
  double side = 0.0;
  if (std::sscanf(header + 5, "%d %d %lf", &d, &n, &side) != 3)
    throw std::runtime_error("read_rlgf: unparsable header in " + path);
  GridFunction f(make_grid(d, n, side));
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!in) throw std::runtime_error("read_rlgf: truncated payload in " + path);
  return f;
}

void write_csv(const std::string& path, const GridFunction& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (int a = 0; a < f.grid.d; ++a) out << "i" << a << ",";
  out << "value\n";
  char buf[32];
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto c = f.grid.unpack(i);
    for (int a = 0; a < f.grid.d; ++a) out << c[a] << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", f[i]);
    out << buf << "\n";
  }
  if (!out) throw std::runtime_error("write_csv: short write to " + path);
}

GridFunction read_csv(const std::string& path, const Grid& g) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("read_csv: empty file " + path);
  GridFunction f(g);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    int c[3] = {0, 0, 0};
    char comma = 0;
    for (int a = 0; a < g.d; ++a) {
      if (!(ss >> c[a] >> comma) || comma != ',')
        throw std::runtime_error("read_csv: bad row in " + path + ": " + line);
    }
    double v = 0.0;
    if (!(ss >> v))
      throw std::runtime_error("read_csv: bad value in " + path + ": " + line);
    f[g.pack(c[0], c[1], c[2])] = v;
    ++rows;
  }
  if (rows != g.num_points())
    throw std::runtime_error("read_csv: row count does not match the grid");
  return f;
}

}  // namespace rieszlab
