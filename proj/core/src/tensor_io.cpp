#include "binloc/tensor_io.hpp"

#include <algorithm>

#include "binloc/error.hpp"
#include "bytes.hpp"

namespace binloc {
namespace {

constexpr std::uint8_t kMagic[4] = {0x44, 0x50, 0x54, 0x31};  // "DPT1"
constexpr std::uint8_t kDtypeF32 = 0;

}  // namespace

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  require(tensor.dims.size() <= 255, ErrorKind::kShape, "too many tensor dimensions");
  require(tensor.element_count() == tensor.data.size(), ErrorKind::kShape,
          "tensor dims do not match its data length");
  detail::ByteWriter w;
  w.raw(kMagic, 4);
  w.u8(kDtypeF32);
  w.u8(static_cast<std::uint8_t>(tensor.dims.size()));
  for (auto d : tensor.dims) w.u32(d);
  w.raw(tensor.data.data(), tensor.data.size() * sizeof(float));
  detail::write_file(path, w.bytes());
}

Tensor read_tensor(const std::filesystem::path& path) {
  detail::ByteReader r(detail::read_file(path));
  std::uint8_t magic[4];
  r.take(magic, 4);
  require(std::equal(magic, magic + 4, kMagic), ErrorKind::kFormat,
          "bad magic in " + path.string() + " (expected DPT1)");
  const std::uint8_t dtype = r.u8();
  require(dtype == kDtypeF32, ErrorKind::kFormat,
          "unsupported tensor dtype " + std::to_string(dtype));
  Tensor t;
  t.dims.resize(r.u8());
  for (auto& d : t.dims) d = r.u32();
  const std::size_t n = t.element_count();
  require(r.remaining() == n * sizeof(float), ErrorKind::kLength,
          "payload-length: header declares " + std::to_string(n) +
              " floats but payload holds " + std::to_string(r.remaining()) + " bytes");
  t.data.resize(n);
  r.take(t.data.data(), n * sizeof(float));
  return t;
}

Tensor spectrogram_to_tensor(const Spectrogram& spec) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(spec.channels()),
            static_cast<std::uint32_t>(spec.frames()),
            static_cast<std::uint32_t>(spec.bins()), 2};
  t.data.reserve(spec.data().size() * 2);
  for (const Complex& z : spec.data()) {
    t.data.push_back(static_cast<float>(z.real()));
    t.data.push_back(static_cast<float>(z.imag()));
  }
  return t;
}

Spectrogram tensor_to_spectrogram(const Tensor& t, const StftConfig& config,
                                  bool band_selected) {
  require(t.dims.size() == 4 && t.dims[3] == 2, ErrorKind::kShape,
          "expected a channels x frames x bins x 2 tensor");
  const std::size_t bins = band_selected ? config.band_size() : config.num_bins();
  require(t.dims[2] == bins, ErrorKind::kShape,
          "tensor bin count does not match the STFT config");
  Spectrogram spec(t.dims[0], t.dims[1], t.dims[2], config, band_selected);
  auto data = spec.data();
  for (std::size_t i = 0; i < data.size(); ++i)
    data[i] = {t.data[2 * i], t.data[2 * i + 1]};
  return spec;
}

}  // namespace binloc
