#include <cstring>
#include <fstream>

#include "semcom/models.hpp"

namespace semcom {
namespace {

constexpr char kMagic[8] = {'S', 'E', 'M', 'C', 'K', 'P', 'T', '1'};

void write_u32(std::ostream& s, std::uint32_t v) {
  s.write(reinterpret_cast<const char*>(&v), 4);
}
std::uint32_t read_u32(std::istream& s) {
  std::uint32_t v = 0;
  s.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
void write_str(std::ostream& s, const std::string& v) {
  write_u32(s, static_cast<std::uint32_t>(v.size()));
  s.write(v.data(), static_cast<std::streamsize>(v.size()));
}
std::string read_str(std::istream& s) {
  std::uint32_t n = read_u32(s);
  std::string v(n, '\0');
  s.read(v.data(), n);
  return v;
}

void write_net(std::ostream& s, const std::string& net_name, Sequential& net) {
  write_str(s, net_name);
  auto state = net.all_state();
  write_u32(s, static_cast<std::uint32_t>(state.size()));
  for (Param* p : state) {
    write_str(s, p->name);
    write_u32(s, static_cast<std::uint32_t>(p->w.shape.size()));
    for (int d : p->w.shape) write_u32(s, static_cast<std::uint32_t>(d));
    s.write(reinterpret_cast<const char*>(p->w.data()),
            static_cast<std::streamsize>(p->w.size() * sizeof(float)));
  }
}

void read_net(std::istream& s, const std::string& expect_name, Sequential& net,
              const std::string& path) {
  std::string name = read_str(s);
  if (name != expect_name)
    throw IoError("checkpoint " + path + ": expected network '" + expect_name +
                  "', found '" + name + "' (partial or reordered bundle)");
  auto state = net.all_state();
  std::uint32_t n = read_u32(s);
  if (n != state.size())
    throw IoError("checkpoint " + path + ": parameter count mismatch in " + name);
  for (Param* p : state) {
    std::string pname = read_str(s);
    if (pname != p->name)
      throw IoError("checkpoint " + path + ": expected parameter '" + p->name +
                    "', found '" + pname + "'");
    std::uint32_t nd = read_u32(s);
    std::vector<int> shape(nd);
    for (auto& d : shape) d = static_cast<int>(read_u32(s));
    if (shape != p->w.shape)
      throw IoError("checkpoint " + path + ": shape mismatch for " + pname);
    s.read(reinterpret_cast<char*>(p->w.data()),
           static_cast<std::streamsize>(p->w.size() * sizeof(float)));
    if (!s) throw IoError("checkpoint " + path + ": truncated at " + pname);
  }
}

}  // namespace

void save_checkpoint(const ModelBundle& bundle, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write checkpoint: " + path);
  f.write(kMagic, sizeof kMagic);
  write_str(f, bundle.config_hash);
  write_u32(f, static_cast<std::uint32_t>(bundle.mode));
  write_u32(f, bundle.eve_trained ? 1 : 0);
  write_u32(f, static_cast<std::uint32_t>(bundle.shape.h));
  write_u32(f, static_cast<std::uint32_t>(bundle.shape.w));
  write_u32(f, static_cast<std::uint32_t>(bundle.shape.c));
  write_u32(f, static_cast<std::uint32_t>(bundle.latent_dim));
  write_u32(f, static_cast<std::uint32_t>(bundle.num_classes));
  auto& b = const_cast<ModelBundle&>(bundle);  // collect is non-const only
  write_net(f, "encoder", b.encoder);
  write_net(f, "recon", b.recon);
  write_net(f, "bob_cls", b.bob_cls);
  write_net(f, "eve_cls", b.eve_cls);
  if (!f) throw IoError("short write to checkpoint: " + path);
}

ModelBundle load_checkpoint(const std::string& path, const ExperimentConfig& cfg,
                            RandomStreams& streams) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  f.read(magic, sizeof magic);
  if (!f || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw IoError("not a checkpoint file: " + path);
  std::string hash = read_str(f);
  if (hash != config_hash(cfg))
    throw IoError("checkpoint " + path + ": config hash mismatch (checkpoint " + hash +
                  ", config " + config_hash(cfg) + ")");
  auto mode = static_cast<TrainingMode>(read_u32(f));
  bool eve_trained = read_u32(f) != 0;
  ImageShape shape;
  shape.h = static_cast<int>(read_u32(f));
  shape.w = static_cast<int>(read_u32(f));
  shape.c = static_cast<int>(read_u32(f));
  int latent = static_cast<int>(read_u32(f));
  int classes = static_cast<int>(read_u32(f));
  if (latent != cfg.latent_dim)
    throw IoError("checkpoint " + path + ": latent_dim mismatch");

  ModelBundle b = build_bundle(cfg, shape, classes, streams);
  b.mode = mode;
  b.eve_trained = eve_trained;
  b.config_hash = hash;
  read_net(f, "encoder", b.encoder, path);
  read_net(f, "recon", b.recon, path);
  read_net(f, "bob_cls", b.bob_cls, path);
  read_net(f, "eve_cls", b.eve_cls, path);
  return b;
}

}  // namespace semcom
