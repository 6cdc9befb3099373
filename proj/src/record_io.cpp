/*
 * Copyright 2026 The tdcat Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "tdcat/record_io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <system_error>

#include "tdcat/error.hpp"
#include "tdcat/text.hpp"

namespace tdcat {

namespace {

template <typename T>
T byteswap_if_big(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    auto bytes = std::bit_cast<std::array<std::byte, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
}

template <typename T>
std::byte* put(std::byte* p, T v) {
  v = byteswap_if_big(v);
  std::memcpy(p, &v, sizeof(T));
  return p + sizeof(T);
}

template <typename T>
const std::byte* get(const std::byte* p, T& v) {
  std::memcpy(&v, p, sizeof(T));
  v = byteswap_if_big(v);
  return p + sizeof(T);
}

std::string errno_text(int err) { return std::generic_category().message(err); }

}  // namespace

void encode_record(const StoredRecord& record, std::byte* out) {
  const SourceRecord& r = record.source;
  std::byte* p = out;
  p = put(p, r.id);
  p = put(p, r.imageid);
  p = put(p, r.zone);
  for (double v : {r.ra, r.dec, r.mag, r.mag_error, r.pixel_x, r.pixel_y,
                   r.ra_err, r.dec_err, r.x, r.y, r.z, r.flux, r.flux_err,
                   r.calmag}) {
    p = put(p, v);
  }
  p = put(p, r.flag);
  for (double v : {r.background, r.threshold, r.ellipticity, r.class_star}) {
    p = put(p, v);
  }
  p = put(p, record.star_id);
  p = put(p, record.epoch);
  p = put(p, record.separation_deg);
  put(p, static_cast<std::uint32_t>(record.status));
}

StoredRecord decode_record(const std::byte* in) {
  StoredRecord record;
  SourceRecord& r = record.source;
  const std::byte* p = in;
  p = get(p, r.id);
  p = get(p, r.imageid);
  p = get(p, r.zone);
  for (double* v : {&r.ra, &r.dec, &r.mag, &r.mag_error, &r.pixel_x,
                    &r.pixel_y, &r.ra_err, &r.dec_err, &r.x, &r.y, &r.z,
                    &r.flux, &r.flux_err, &r.calmag}) {
    p = get(p, *v);
  }
  p = get(p, r.flag);
  for (double* v : {&r.background, &r.threshold, &r.ellipticity,
                    &r.class_star}) {
    p = get(p, *v);
  }
  p = get(p, record.star_id);
  p = get(p, record.epoch);
  p = get(p, record.separation_deg);
  std::uint32_t status = 0;
  get(p, status);
  record.status = static_cast<RecordStatus>(status);
  return record;
}

std::vector<std::byte> encode_segment(std::span<const StoredRecord> records) {
  std::vector<std::byte> bytes(kSegmentHeaderBytes +
                               records.size() * kRecordBytes);
  std::memcpy(bytes.data(), kSegmentMagic.data(), kSegmentMagic.size());
  put(bytes.data() + 4, static_cast<std::uint64_t>(records.size()));
  std::byte* p = bytes.data() + kSegmentHeaderBytes;
  for (const auto& r : records) {
    encode_record(r, p);
    p += kRecordBytes;
  }
  return bytes;
}

std::vector<StoredRecord> decode_segment(std::span<const std::byte> bytes) {
  if (bytes.size() < kSegmentHeaderBytes ||
      std::memcmp(bytes.data(), kSegmentMagic.data(), 4) != 0) {
    throw StorageError("segment: bad magic");
  }
  std::uint64_t count = 0;
  get(bytes.data() + 4, count);
  if (bytes.size() != kSegmentHeaderBytes + count * kRecordBytes) {
    throw StorageError("segment: size does not match record count");
  }
  std::vector<StoredRecord> out;
  out.reserve(count);
  const std::byte* p = bytes.data() + kSegmentHeaderBytes;
  for (std::uint64_t i = 0; i < count; ++i, p += kRecordBytes) {
    out.push_back(decode_record(p));
  }
  return out;
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) {
    throw StorageError("open " + path.string() + ": " + errno_text(errno));
  }
  std::vector<std::byte> bytes;
  std::byte buf[1 << 16];
  while (true) {
    const ssize_t n = ::read(fd, buf, sizeof(buf));
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw StorageError("read " + path.string() + ": " + errno_text(err));
    }
    if (n == 0) break;
    bytes.insert(bytes.end(), buf, buf + n);
  }
  ::close(fd);
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path,
                       std::span<const std::byte> bytes, bool sync) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  const int fd =
      ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw StorageError("open " + tmp.string() + ": " + errno_text(errno));
  }
  auto fail = [&](const std::string& what, int err) {
    ::close(fd);
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw StorageError(what + " " + tmp.string() + ": " + errno_text(err));
  };
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("write", errno);
    }
    done += static_cast<std::size_t>(n);
  }
  if (sync && ::fsync(fd) != 0) fail("fsync", errno);
  if (::close(fd) != 0) {
    const int err = errno;
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw StorageError("close " + tmp.string() + ": " + errno_text(err));
  }
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    const int err = errno;
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw StorageError("rename " + tmp.string() + ": " + errno_text(err));
  }
  if (sync) {
    const int dfd = ::open(path.parent_path().c_str(), O_RDONLY | O_DIRECTORY);
    if (dfd >= 0) {
      ::fsync(dfd);
      ::close(dfd);
    }
  }
}

void write_segment_file(const std::filesystem::path& path,
                        std::span<const StoredRecord> records, bool sync) {
  const auto bytes = encode_segment(records);
  write_file_atomic(path, bytes, sync);
}

std::vector<StoredRecord> read_segment_file(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_segment(bytes);
  } catch (const StorageError& e) {
    throw StorageError(path.string() + ": " + e.what());
  }
}

bool base_order(const StoredRecord& a, const StoredRecord& b) {
  if (a.star_id != b.star_id) return a.star_id < b.star_id;
  if (a.epoch != b.epoch) return a.epoch < b.epoch;
  return a.source.id < b.source.id;
}

std::string csv_header() {
  std::string h;
  for (std::size_t i = 0; i < kSourceColumns.size(); ++i) {
    if (i) h += ',';
    h += kSourceColumns[i];
  }
  return h;
}

void append_csv_row(std::string& line, const SourceRecord& r) {
  text::append(line, r.id);
  line += ',';
  text::append(line, r.imageid);
  line += ',';
  text::append(line, r.zone);
  for (double v : {r.ra, r.dec, r.mag, r.mag_error, r.pixel_x, r.pixel_y,
                   r.ra_err, r.dec_err, r.x, r.y, r.z, r.flux, r.flux_err,
                   r.calmag}) {
    line += ',';
    text::append(line, v);
  }
  line += ',';
  text::append(line, r.flag);
  for (double v : {r.background, r.threshold, r.ellipticity, r.class_star}) {
    line += ',';
    text::append(line, v);
  }
}

void write_csv(std::ostream& out, std::span<const SourceRecord> records) {
  out << csv_header() << '\n';
  std::string line;
  for (const auto& r : records) {
    line.clear();
    append_csv_row(line, r);
    line += '\n';
    out << line;
  }
}

std::vector<SourceRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != csv_header()) {
    throw DomainError("csv header", "expected '" + csv_header() + "'");
  }
  std::vector<SourceRecord> out;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line);
    if (f.size() != kSourceColumns.size()) {
      throw DomainError("csv row", "expected 22 fields, got " +
                                       std::to_string(f.size()));
    }
    SourceRecord r;
    std::size_t k = 0;
    r.id = text::parse<std::uint64_t>(f[k++], "id");
    r.imageid = text::parse<std::uint32_t>(f[k++], "imageid");
    r.zone = text::parse<std::uint16_t>(f[k++], "zone");
    for (double* v : {&r.ra, &r.dec, &r.mag, &r.mag_error, &r.pixel_x,
                      &r.pixel_y, &r.ra_err, &r.dec_err, &r.x, &r.y, &r.z,
                      &r.flux, &r.flux_err, &r.calmag}) {
      *v = text::parse<double>(f[k], kSourceColumns[k]);
      ++k;
    }
    r.flag = text::parse<std::uint32_t>(f[k++], "flag");
    for (double* v : {&r.background, &r.threshold, &r.ellipticity,
                      &r.class_star}) {
      *v = text::parse<double>(f[k], kSourceColumns[k]);
      ++k;
    }
    out.push_back(r);
  }
  return out;
}

void write_csv_file(const std::filesystem::path& path,
                    std::span<const SourceRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StorageError("cannot write " + path.string());
  write_csv(out, records);
  if (!out) throw StorageError("write failed: " + path.string());
}

std::vector<SourceRecord> read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot read " + path.string());
  return read_csv(in);
}

}  // namespace tdcat
