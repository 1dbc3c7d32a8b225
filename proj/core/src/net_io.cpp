#include "sersrecon/net_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace sers {

namespace {

constexpr int kFormatVersion = 1;
constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

static_assert(std::endian::native == std::endian::little,
              "model files assume a little-endian host");

std::string b64_encode(const std::vector<double>& values) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(values.data());
  const std::size_t n = values.size() * sizeof(double);
  std::string out;
  out.reserve((n + 2) / 3 * 4);
  for (std::size_t i = 0; i < n; i += 3) {
    unsigned v = bytes[i] << 16;
    if (i + 1 < n) v |= bytes[i + 1] << 8;
    if (i + 2 < n) v |= bytes[i + 2];
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(i + 1 < n ? kB64Alphabet[(v >> 6) & 63] : '=');
    out.push_back(i + 2 < n ? kB64Alphabet[v & 63] : '=');
  }
  return out;
}

std::vector<double> b64_decode(const std::string& text, std::size_t expect) {
  static const auto table = [] {
    std::array<int, 256> t{};
    t.fill(-1);
    for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(kB64Alphabet[i])] = i;
    return t;
  }();

  std::vector<unsigned char> bytes;
  bytes.reserve(text.size() / 4 * 3);
  unsigned acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    const int v = table[static_cast<unsigned char>(c)];
    if (v < 0) throw std::runtime_error("model: invalid base64 payload");
    acc = (acc << 6) | static_cast<unsigned>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      bytes.push_back(static_cast<unsigned char>((acc >> bits) & 0xff));
    }
  }
  if (bytes.size() != expect * sizeof(double))
    throw std::runtime_error("model: parameter payload size mismatch");
  std::vector<double> out(expect);
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

const char* kind_string(LayerKind k) {
  switch (k) {
    case LayerKind::kConv1d: return "conv1d";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kMaxPool: return "maxpool";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kDense: return "dense";
    case LayerKind::kSoftmax: return "softmax";
  }
  return "?";
}

LayerKind kind_from_string(const std::string& s) {
  if (s == "conv1d") return LayerKind::kConv1d;
  if (s == "relu") return LayerKind::kRelu;
  if (s == "maxpool") return LayerKind::kMaxPool;
  if (s == "flatten") return LayerKind::kFlatten;
  if (s == "dense") return LayerKind::kDense;
  if (s == "softmax") return LayerKind::kSoftmax;
  throw std::runtime_error("model: unknown layer kind '" + s + "'");
}

}  // namespace

void save_network(const Network& net, const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  doc["format_version"] = kFormatVersion;
  doc["config"]["input_length"] = net.config.input_length;
  doc["config"]["n_classes"] = net.config.n_classes;
  auto& layers = doc["config"]["layers"] = nlohmann::ordered_json::array();
  for (const LayerSpec& s : net.config.layers) {
    nlohmann::ordered_json l;
    l["kind"] = kind_string(s.kind);
    switch (s.kind) {
      case LayerKind::kConv1d:
        l["out_channels"] = s.out_channels;
        l["kernel_size"] = s.kernel_size;
        l["stride"] = s.stride;
        break;
      case LayerKind::kMaxPool:
        l["width"] = s.width;
        break;
      case LayerKind::kDense:
        l["out_units"] = s.out_units;
        break;
      default:
        break;
    }
    layers.push_back(std::move(l));
  }
  doc["trainable_mask"] = std::vector<bool>(net.trainable.begin(), net.trainable.end());
  auto& params = doc["parameters"] = nlohmann::ordered_json::array();
  for (const LayerParams& p : net.params) {
    nlohmann::ordered_json entry;
    entry["weights_b64"] = b64_encode(p.weights);
    entry["bias_b64"] = b64_encode(p.bias);
    params.push_back(std::move(entry));
  }

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": invalid JSON: " + e.what());
  }

  try {
    if (doc.at("format_version").get<int>() != kFormatVersion)
      throw std::runtime_error("unsupported format_version");

    Network net;
    const auto& cfg = doc.at("config");
    net.config.input_length = cfg.at("input_length").get<int>();
    net.config.n_classes = cfg.at("n_classes").get<int>();
    for (const auto& l : cfg.at("layers")) {
      LayerSpec s;
      s.kind = kind_from_string(l.at("kind").get<std::string>());
      switch (s.kind) {
        case LayerKind::kConv1d:
          s.out_channels = l.at("out_channels").get<int>();
          s.kernel_size = l.at("kernel_size").get<int>();
          s.stride = l.at("stride").get<int>();
          break;
        case LayerKind::kMaxPool:
          s.width = l.at("width").get<int>();
          break;
        case LayerKind::kDense:
          s.out_units = l.at("out_units").get<int>();
          break;
        default:
          break;
      }
      net.config.layers.push_back(s);
    }

    const std::vector<Shape> shapes = propagate_shapes(net.config);
    const std::vector<int> plist = parameterized_layers(net.config);

    const auto mask = doc.at("trainable_mask").get<std::vector<bool>>();
    if (mask.size() != plist.size())
      throw std::runtime_error("trainable_mask length mismatch");
    net.trainable.assign(mask.begin(), mask.end());

    const auto& params = doc.at("parameters");
    if (params.size() != plist.size())
      throw std::runtime_error("parameters length mismatch");
    for (std::size_t p = 0; p < plist.size(); ++p) {
      const LayerSpec& s = net.config.layers[plist[p]];
      const Shape& in = shapes[plist[p]];
      std::size_t w_n, b_n;
      if (s.kind == LayerKind::kConv1d) {
        w_n = static_cast<std::size_t>(s.out_channels) * in.channels * s.kernel_size;
        b_n = s.out_channels;
      } else {
        w_n = static_cast<std::size_t>(s.out_units) * in.length;
        b_n = s.out_units;
      }
      LayerParams lp;
      lp.weights = b64_decode(params[p].at("weights_b64").get<std::string>(), w_n);
      lp.bias = b64_decode(params[p].at("bias_b64").get<std::string>(), b_n);
      net.params.push_back(std::move(lp));
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": bad model document: " + e.what());
  }
}

}  // namespace sers
