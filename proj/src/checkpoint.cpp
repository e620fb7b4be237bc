#include "metacon/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace metacon {

namespace {

constexpr char kMagic[5] = {'M', 'C', 'O', 'N', '\0'};

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f64(std::string& out, double d) {
  uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(out, v);
}
void put_str(std::string& out, const std::string& s) {
  put_u32(out, static_cast<uint32_t>(s.size()));
  out.append(s);
}

struct Reader {
  const std::string& buf;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > buf.size()) throw std::runtime_error("corrupt checkpoint");
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() {
    uint64_t v = u64();
    double d;
    std::memcpy(&d, &v, 8);
    return d;
  }
  std::string str() {
    uint32_t n = u32();
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

void put_param_set(std::string& out, const ParamSet& p) {
  put_u32(out, static_cast<uint32_t>(p.size()));
  for (const auto& e : p.entries()) {
    put_str(out, e.name);
    put_u32(out, static_cast<uint32_t>(e.value.rows()));
    put_u32(out, static_cast<uint32_t>(e.value.cols()));
    for (long i = 0; i < e.value.size(); ++i) put_f64(out, e.value.data()[i]);
  }
}

ParamSet read_param_set(Reader& r) {
  ParamSet p;
  uint32_t n = r.u32();
  for (uint32_t i = 0; i < n; ++i) {
    std::string name = r.str();
    uint32_t rows = r.u32();
    uint32_t cols = r.u32();
    Mat m(rows, cols);
    for (long j = 0; j < m.size(); ++j) m.data()[j] = r.f64();
    p.add(name, std::move(m));
  }
  return p;
}

}  // namespace

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  std::string out;
  out.append(kMagic, 5);
  put_u32(out, Checkpoint::kVersion);
  put_str(out, c.algo);

  put_u32(out, static_cast<uint32_t>(c.ints.size()));
  for (const auto& [k, v] : c.ints) {
    put_str(out, k);
    put_u64(out, static_cast<uint64_t>(v));
  }
  put_u32(out, static_cast<uint32_t>(c.reals.size()));
  for (const auto& [k, v] : c.reals) {
    put_str(out, k);
    put_f64(out, v);
  }
  put_u32(out, static_cast<uint32_t>(c.strs.size()));
  for (const auto& [k, v] : c.strs) {
    put_str(out, k);
    put_str(out, v);
  }
  put_u32(out, static_cast<uint32_t>(c.blobs.size()));
  for (const auto& [k, v] : c.blobs) {
    put_str(out, k);
    put_u32(out, static_cast<uint32_t>(v.size()));
    out.append(reinterpret_cast<const char*>(v.data()), v.size());
  }
  put_u32(out, static_cast<uint32_t>(c.sets.size()));
  for (const auto& [k, v] : c.sets) {
    put_str(out, k);
    put_param_set(out, v);
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write checkpoint " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read checkpoint " + path);
  std::string buf((std::istreambuf_iterator<char>(f)),
                  std::istreambuf_iterator<char>());
  Reader r{buf};
  r.need(5);
  if (std::memcmp(buf.data(), kMagic, 5) != 0)
    throw std::runtime_error("corrupt checkpoint: bad magic");
  r.pos = 5;
  uint32_t version = r.u32();
  if (version != Checkpoint::kVersion)
    throw std::runtime_error("checkpoint version mismatch: got " +
                             std::to_string(version));
  Checkpoint c;
  c.algo = r.str();
  for (uint32_t i = 0, n = r.u32(); i < n; ++i) {
    std::string k = r.str();
    c.ints[k] = static_cast<int64_t>(r.u64());
  }
  for (uint32_t i = 0, n = r.u32(); i < n; ++i) {
    std::string k = r.str();
    c.reals[k] = r.f64();
  }
  for (uint32_t i = 0, n = r.u32(); i < n; ++i) {
    std::string k = r.str();
    c.strs[k] = r.str();
  }
  for (uint32_t i = 0, n = r.u32(); i < n; ++i) {
    std::string k = r.str();
    uint32_t len = r.u32();
    r.need(len);
    c.blobs[k].assign(buf.begin() + static_cast<long>(r.pos),
                      buf.begin() + static_cast<long>(r.pos + len));
    r.pos += len;
  }
  for (uint32_t i = 0, n = r.u32(); i < n; ++i) {
    std::string k = r.str();
    c.sets.emplace(k, read_param_set(r));
  }
  if (r.pos != buf.size()) throw std::runtime_error("corrupt checkpoint: trailing data");
  return c;
}

}  // namespace metacon
