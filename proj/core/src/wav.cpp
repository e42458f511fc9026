#include <cmath>
#include <cstring>

#include "binloc/datagen.hpp"
#include "binloc/error.hpp"
#include "bytes.hpp"

namespace binloc {

Signal read_wav(const std::filesystem::path& path, double* sample_rate) {
  detail::ByteReader r(detail::read_file(path));
  char tag[4];
  r.take(tag, 4);
  require(std::memcmp(tag, "RIFF", 4) == 0, ErrorKind::kFormat,
          path.string() + " is not a RIFF file");
  r.u32();
  r.take(tag, 4);
  require(std::memcmp(tag, "WAVE", 4) == 0, ErrorKind::kFormat,
          path.string() + " is not a WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  while (r.remaining() >= 8) {
    r.take(tag, 4);
    const std::uint32_t size = r.u32();
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      require(size >= 16, ErrorKind::kFormat, "short fmt chunk");
      format = r.u16();
      channels = r.u16();
      rate = r.u32();
      r.u32();  // byte rate
      r.u16();  // block align
      bits = r.u16();
      std::vector<std::uint8_t> rest(size - 16);
      if (!rest.empty()) r.take(rest.data(), rest.size());
      // WAVE_FORMAT_EXTENSIBLE: the subformat GUID starts at offset 8.
      if (format == 0xFFFE && rest.size() >= 10)
        format = static_cast<std::uint16_t>(rest[8] | (rest[9] << 8));
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      require(have_fmt, ErrorKind::kFormat, "data chunk before fmt chunk");
      require(channels >= 1, ErrorKind::kFormat, "WAV has no channels");
      const bool pcm16 = format == 1 && bits == 16;
      const bool f32 = format == 3 && bits == 32;
      require(pcm16 || f32, ErrorKind::kFormat,
              "only 16-bit PCM and 32-bit float WAV are supported");
      const std::size_t frame_bytes = std::size_t{channels} * bits / 8;
      const std::size_t frames = std::min<std::size_t>(size, r.remaining()) / frame_bytes;
      Signal out(frames);
      std::vector<std::uint8_t> frame(frame_bytes);
      for (std::size_t i = 0; i < frames; ++i) {
        r.take(frame.data(), frame_bytes);
        if (pcm16) {
          std::int16_t v;
          std::memcpy(&v, frame.data(), 2);
          out[i] = v / 32768.0;
        } else {
          float v;
          std::memcpy(&v, frame.data(), 4);
          out[i] = v;
        }
      }
      if (sample_rate) *sample_rate = rate;
      return out;
    } else {
      std::vector<std::uint8_t> skip(size + (size & 1));
      r.take(skip.data(), std::min(skip.size(), r.remaining()));
    }
  }
  fail(ErrorKind::kFormat, path.string() + " has no data chunk");
}

void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               double sample_rate) {
  detail::ByteWriter w;
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 4);
  w.raw("RIFF", 4);
  w.u32(36 + data_bytes);
  w.raw("WAVE", 4);
  w.raw("fmt ", 4);
  w.u32(16);
  w.u16(3);  // IEEE float
  w.u16(1);
  w.u32(static_cast<std::uint32_t>(sample_rate));
  w.u32(static_cast<std::uint32_t>(sample_rate) * 4);
  w.u16(4);
  w.u16(32);
  w.raw("data", 4);
  w.u32(data_bytes);
  for (double v : samples) w.f32(static_cast<float>(v));
  detail::write_file(path, w.bytes());
}

}  // namespace binloc
