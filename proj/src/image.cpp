#include "otkit/image.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <fstream>

namespace otkit {

namespace {

const unsigned char kPngSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

std::uint32_t get_u32(const unsigned char* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void append_chunk(std::vector<unsigned char>& out, const char type[4],
                  const std::vector<unsigned char>& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  uLong crc = crc32(0L, out.data() + start, static_cast<uInt>(4 + data.size()));
  put_u32(out, static_cast<std::uint32_t>(crc));
}

unsigned char paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return static_cast<unsigned char>(a);
  if (pb <= pc) return static_cast<unsigned char>(b);
  return static_cast<unsigned char>(c);
}

}  // namespace

Image Image::create(int width, int height, int channels) {
  if (width <= 0 || height <= 0 || (channels != 3 && channels != 4))
    throw OtError(Errc::invalid_argument, "bad image dimensions");
  Image img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.pixels.assign(static_cast<size_t>(width) * height * channels, 0);
  return img;
}

void write_png(const std::string& path, const Image& img) {
  if (img.width <= 0 || img.height <= 0 || (img.channels != 3 && img.channels != 4) ||
      img.pixels.size() != static_cast<size_t>(img.width) * img.height * img.channels)
    throw OtError(Errc::invalid_argument, "malformed image");

  const size_t stride = static_cast<size_t>(img.width) * img.channels;
  std::vector<unsigned char> raw((stride + 1) * img.height);
  for (int y = 0; y < img.height; ++y) {
    raw[(stride + 1) * y] = 0;  // filter: none
    std::memcpy(&raw[(stride + 1) * y + 1], &img.pixels[stride * y], stride);
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw OtError(Errc::io_error, "deflate failed");
  compressed.resize(bound);

  std::vector<unsigned char> out(kPngSignature, kPngSignature + 8);
  std::vector<unsigned char> ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(img.width));
  put_u32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.push_back(8);                                      // bit depth
  ihdr.push_back(img.channels == 3 ? 2 : 6);              // color type
  ihdr.push_back(0);                                      // compression
  ihdr.push_back(0);                                      // filter
  ihdr.push_back(0);                                      // no interlace
  append_chunk(out, "IHDR", ihdr);
  append_chunk(out, "IDAT", compressed);
  append_chunk(out, "IEND", {});

  std::ofstream f(path, std::ios::binary);
  if (!f) throw OtError(Errc::io_error, "cannot open for writing: " + path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw OtError(Errc::io_error, "write failed: " + path);
}

Image read_png(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw OtError(Errc::io_error, "cannot open for reading: " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(f)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < 8 || std::memcmp(buf.data(), kPngSignature, 8) != 0)
    throw OtError(Errc::io_error, "not a PNG file: " + path);

  int width = 0, height = 0, channels = 0;
  std::vector<unsigned char> idat;
  size_t pos = 8;
  bool seen_ihdr = false, seen_iend = false;
  while (pos + 12 <= buf.size() && !seen_iend) {
    std::uint32_t len = get_u32(&buf[pos]);
    if (pos + 12 + len > buf.size()) throw OtError(Errc::io_error, "truncated PNG: " + path);
    const unsigned char* type = &buf[pos + 4];
    const unsigned char* data = &buf[pos + 8];
    std::uint32_t crc_stored = get_u32(&buf[pos + 8 + len]);
    if (crc32(0L, type, 4 + len) != crc_stored)
      throw OtError(Errc::io_error, "PNG chunk CRC mismatch: " + path);

    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw OtError(Errc::io_error, "bad IHDR: " + path);
      width = static_cast<int>(get_u32(data));
      height = static_cast<int>(get_u32(data + 4));
      int depth = data[8], color = data[9], interlace = data[12];
      if (depth != 8 || (color != 2 && color != 6) || interlace != 0)
        throw OtError(Errc::io_error, "unsupported PNG format (need 8-bit RGB/RGBA): " + path);
      channels = color == 2 ? 3 : 4;
      seen_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      seen_iend = true;
    }
    pos += 12 + len;
  }
  if (!seen_ihdr || width <= 0 || height <= 0)
    throw OtError(Errc::io_error, "missing IHDR: " + path);
  if (static_cast<long long>(width) * height > 100000000LL)
    throw OtError(Errc::io_error, "image too large: " + path);

  const size_t stride = static_cast<size_t>(width) * channels;
  uLongf raw_len = static_cast<uLongf>((stride + 1) * height);
  std::vector<unsigned char> raw(raw_len);
  if (uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
      raw_len != (stride + 1) * static_cast<size_t>(height))
    throw OtError(Errc::io_error, "inflate failed: " + path);

  Image img = Image::create(width, height, channels);
  const int bpp = channels;
  for (int y = 0; y < height; ++y) {
    unsigned char filter = raw[(stride + 1) * y];
    const unsigned char* src = &raw[(stride + 1) * y + 1];
    unsigned char* dst = &img.pixels[stride * y];
    const unsigned char* prev = y > 0 ? &img.pixels[stride * (y - 1)] : nullptr;
    for (size_t x = 0; x < stride; ++x) {
      int A = x >= static_cast<size_t>(bpp) ? dst[x - bpp] : 0;
      int B = prev ? prev[x] : 0;
      int Cc = (prev && x >= static_cast<size_t>(bpp)) ? prev[x - bpp] : 0;
      int v;
      switch (filter) {
        case 0: v = src[x]; break;
        case 1: v = src[x] + A; break;
        case 2: v = src[x] + B; break;
        case 3: v = src[x] + (A + B) / 2; break;
        case 4: v = src[x] + paeth(A, B, Cc); break;
        default: throw OtError(Errc::io_error, "unknown PNG filter: " + path);
      }
      dst[x] = static_cast<unsigned char>(v & 0xff);
    }
  }
  return img;
}

}  // namespace otkit
