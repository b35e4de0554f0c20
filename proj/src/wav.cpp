#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "vanc/errors.hpp"
#include "vanc/signal.hpp"

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

namespace vanc {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T read_le(const std::vector<char>& buf, std::size_t off) {
  T v;
  std::memcpy(&v, buf.data() + off, sizeof(T));
  return v;
}

template <typename T>
void write_le(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

Signal load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open WAV file " + path.string());
  const std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
  const auto fail = [&](const std::string& why) {
    return FormatError(path.string() + ": " + why);
  };
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw fail("not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::size_t data_off = 0, data_len = 0;
  bool have_data = false;

  std::size_t off = 12;
  while (off + 8 <= buf.size()) {
    const std::string id(buf.data() + off, 4);
    const auto len = read_le<std::uint32_t>(buf, off + 4);
    const std::size_t body = off + 8;
    const std::size_t avail = std::min<std::size_t>(len, buf.size() - body);
    if (id == "fmt ") {
      if (avail < 16) throw fail("truncated fmt chunk");
      format = read_le<std::uint16_t>(buf, body);
      channels = read_le<std::uint16_t>(buf, body + 2);
      rate = read_le<std::uint32_t>(buf, body + 4);
      bits = read_le<std::uint16_t>(buf, body + 14);
      if (format == kFormatExtensible) {
        if (avail < 26) throw fail("truncated extensible fmt chunk");
        format = read_le<std::uint16_t>(buf, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      data_off = body;
      data_len = avail;
      have_data = true;
    }
    off = body + len + (len & 1);
  }
  if (!have_fmt) throw fail("missing fmt chunk");
  if (!have_data) throw fail("missing data chunk");
  if (channels != 1 && channels != 2) throw fail("only mono or stereo supported");
  if (rate == 0) throw fail("zero sample rate");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32) throw fail("unsupported encoding (need PCM16 or float32)");

  const std::size_t frame_bytes = channels * (bits / 8);
  const std::size_t frames = data_len / frame_bytes;
  if (frames == 0) throw fail("empty data chunk");

  Signal s{std::vector<double>(frames), static_cast<int>(rate)};
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t p = data_off + i * frame_bytes + c * (bits / 8);
      acc += pcm16 ? read_le<std::int16_t>(buf, p) / 32767.0
                   : static_cast<double>(read_le<float>(buf, p));
    }
    s.samples[i] = acc / channels;
  }
  return s;
}

void save_wav(const std::filesystem::path& path, std::span<const Signal> channels,
              WavEncoding encoding) {
  if (channels.empty() || channels.size() > 2)
    throw FormatError("save_wav: need one or two channels");
  const std::size_t frames = channels[0].samples.size();
  const int rate = channels[0].sample_rate;
  for (const auto& ch : channels)
    if (ch.samples.size() != frames || ch.sample_rate != rate)
      throw FormatError("save_wav: channels differ in length or rate");

  const std::uint16_t nch = static_cast<std::uint16_t>(channels.size());
  const std::uint16_t bits = encoding == WavEncoding::pcm16 ? 16 : 32;
  const std::uint16_t format = encoding == WavEncoding::pcm16 ? kFormatPcm : kFormatFloat;
  const std::uint32_t data_len = static_cast<std::uint32_t>(frames * nch * bits / 8);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write WAV file " + path.string());
  out.write("RIFF", 4);
  write_le<std::uint32_t>(out, 36 + data_len);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_le<std::uint32_t>(out, 16);
  write_le<std::uint16_t>(out, format);
  write_le<std::uint16_t>(out, nch);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(rate));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(rate) * nch * bits / 8);
  write_le<std::uint16_t>(out, static_cast<std::uint16_t>(nch * bits / 8));
  write_le<std::uint16_t>(out, bits);
  out.write("data", 4);
  write_le<std::uint32_t>(out, data_len);
  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto& ch : channels) {
      const double v = std::clamp(ch.samples[i], -1.0, 1.0);
      if (encoding == WavEncoding::pcm16)
        write_le<std::int16_t>(out, static_cast<std::int16_t>(std::lround(v * 32767.0)));
      else
        write_le<float>(out, static_cast<float>(v));
    }
  }
  if (!out) throw FormatError("write failed for " + path.string());
}

void save_wav(const std::filesystem::path& path, const Signal& mono,
              WavEncoding encoding) {
  save_wav(path, std::span<const Signal>(&mono, 1), encoding);
}

}  // namespace vanc
