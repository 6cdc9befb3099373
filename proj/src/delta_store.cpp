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
#include "tdcat/delta_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cerrno>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

#include "tdcat/error.hpp"
#include "tdcat/text.hpp"

namespace fs = std::filesystem;

namespace tdcat {

namespace {

using clock_type = std::chrono::steady_clock;

constexpr std::array<char, 4> kIndexMagic = {'T', 'D', 'I', '1'};
constexpr std::size_t kIndexEntryBytes = 24;
constexpr std::size_t kStarIdOffset = kCatalogRowBytes;
constexpr std::size_t kEpochOffset = kCatalogRowBytes + 8;

std::string errno_text(int err) { return std::generic_category().message(err); }

/// Exclusive advisory lock on <dir>/LOCK, held for one store operation.
class PartitionLock {
 public:
  explicit PartitionLock(const fs::path& dir) {
    const fs::path path = dir / "LOCK";
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) {
      throw StorageError("open " + path.string() + ": " + errno_text(errno));
    }
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw ConcurrencyError("partition " + dir.string() +
                             " is busy: writer and merge may not overlap");
    }
  }
  ~PartitionLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  PartitionLock(const PartitionLock&) = delete;
  PartitionLock& operator=(const PartitionLock&) = delete;

 private:
  int fd_{-1};
};

/// Streaming temp-file writer committed by rename. Destruction without
/// commit removes the temp file.
class AtomicWriter {
 public:
  AtomicWriter(fs::path path, bool sync, std::uint64_t limit)
      : path_(std::move(path)), sync_(sync), limit_(limit) {
    tmp_ = path_;
    tmp_ += ".tmp";
    fd_ = ::open(tmp_.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd_ < 0) {
      throw StorageError("open " + tmp_.string() + ": " + errno_text(errno));
    }
  }
  ~AtomicWriter() {
    if (fd_ >= 0) ::close(fd_);
    if (!committed_) {
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }
  AtomicWriter(const AtomicWriter&) = delete;
  AtomicWriter& operator=(const AtomicWriter&) = delete;

  void write(const std::byte* data, std::size_t size) {
    std::size_t allowed = size;
    bool full = false;
    if (limit_ > 0 && written_ + size > limit_) {
      allowed = static_cast<std::size_t>(limit_ - written_);
      full = true;
    }
    std::size_t done = 0;
    while (done < allowed) {
      const ssize_t n = ::write(fd_, data + done, allowed - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw StorageError("write " + tmp_.string() + ": " + errno_text(errno));
      }
      done += static_cast<std::size_t>(n);
    }
    written_ += done;
    if (full) {
      throw StorageError("write " + tmp_.string() + ": " +
                         errno_text(ENOSPC) + " (partition capacity)");
    }
  }

  void commit() {
    if (sync_ && ::fsync(fd_) != 0) {
      throw StorageError("fsync " + tmp_.string() + ": " + errno_text(errno));
    }
    const int rc = ::close(fd_);
    fd_ = -1;
    if (rc != 0) {
      throw StorageError("close " + tmp_.string() + ": " + errno_text(errno));
    }
    if (::rename(tmp_.c_str(), path_.c_str()) != 0) {
      throw StorageError("rename " + tmp_.string() + ": " + errno_text(errno));
    }
    committed_ = true;
    if (sync_) sync_dir(path_.parent_path());
  }

  std::uint64_t written() const noexcept { return written_; }

  static void sync_dir(const fs::path& dir) {
    const int dfd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
    if (dfd >= 0) {
      ::fsync(dfd);
      ::close(dfd);
    }
  }

 private:
  fs::path path_;
  fs::path tmp_;
  bool sync_;
  std::uint64_t limit_;
  int fd_{-1};
  std::uint64_t written_{0};
  bool committed_{false};
};

template <typename T>
T load_le(const std::byte* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<std::byte, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    v = std::bit_cast<T>(bytes);
  }
  return v;
}

template <typename T>
void store_le(std::byte* p, T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<std::byte, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    v = std::bit_cast<T>(bytes);
  }
  std::memcpy(p, &v, sizeof(T));
}

std::string segment_name(std::uint64_t seq, double epoch) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "seg-%08" PRIu64 "-%016" PRIx64 ".tds", seq,
                std::bit_cast<std::uint64_t>(epoch));
  return buf;
}

std::optional<SegmentRef> parse_segment_name(const fs::path& path,
                                             std::int64_t night) {
  const std::string name = path.filename().string();
  std::uint64_t seq = 0;
  std::uint64_t bits = 0;
  char tail[8] = {};
  if (name.size() != 33 ||
      std::sscanf(name.c_str(), "seg-%8" SCNu64 "-%16" SCNx64 "%4s", &seq,
                  &bits, tail) != 3 ||
      std::strcmp(tail, ".tds") != 0) {
    return std::nullopt;
  }
  return SegmentRef{path, night, seq, std::bit_cast<double>(bits)};
}

std::optional<std::int64_t> parse_night_dir(const fs::path& path) {
  const std::string name = path.filename().string();
  if (name.rfind("night-", 0) != 0) return std::nullopt;
  try {
    return text::parse<std::int64_t>(std::string_view(name).substr(6), "night");
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

std::string base_name(std::uint64_t gen, const char* ext) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "base-%06" PRIu64 ".%s", gen, ext);
  return buf;
}

std::vector<SegmentRef> list_segments(const fs::path& night_dir,
                                      std::int64_t night) {
  std::vector<SegmentRef> out;
  std::error_code ec;
  if (!fs::is_directory(night_dir, ec)) return out;
  for (const auto& entry : fs::directory_iterator(night_dir)) {
    if (!entry.is_regular_file()) continue;
    if (auto ref = parse_segment_name(entry.path(), night)) {
      out.push_back(*ref);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const SegmentRef& a, const SegmentRef& b) { return a.seq < b.seq; });
  return out;
}

std::uint64_t segment_record_count(const fs::path& path) {
  const auto size = fs::file_size(path);
  if (size < kSegmentHeaderBytes) return 0;
  return (size - kSegmentHeaderBytes) / kRecordBytes;
}

std::vector<std::byte> read_range(const fs::path& path, std::uint64_t offset,
                                  std::uint64_t size) {
  std::vector<std::byte> out(size);
  const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) {
    throw StorageError("open " + path.string() + ": " + errno_text(errno));
  }
  std::uint64_t done = 0;
  while (done < size) {
    const ssize_t n = ::pread(fd, out.data() + done, size - done,
                              static_cast<off_t>(offset + done));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      const int err = n < 0 ? errno : EIO;
      ::close(fd);
      throw StorageError("read " + path.string() + ": " + errno_text(err));
    }
    done += static_cast<std::uint64_t>(n);
  }
  ::close(fd);
  return out;
}

void remove_tmp_files(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".tmp") fs::remove(entry.path(), ec);
  }
}

void check_segment(std::span<const std::byte> bytes, const fs::path& path) {
  if (bytes.size() < kSegmentHeaderBytes ||
      std::memcmp(bytes.data(), kSegmentMagic.data(), 4) != 0 ||
      bytes.size() != kSegmentHeaderBytes +
                          load_le<std::uint64_t>(bytes.data() + 4) * kRecordBytes) {
    throw StorageError(path.string() + ": malformed segment");
  }
}

struct MergeKey {
  StarId star_id;
  double epoch;
  std::uint64_t id;
  std::size_t offset;  // into the merge buffer
};

}  // namespace

// --- snapshot -------------------------------------------------------------

std::vector<BaseIndexEntry> read_base_index(const fs::path& path) {
  const auto bytes = read_file(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kIndexMagic.data(), 4) != 0) {
    throw StorageError(path.string() + ": bad index magic");
  }
  const auto count = load_le<std::uint64_t>(bytes.data() + 4);
  if (bytes.size() != 12 + count * kIndexEntryBytes) {
    throw StorageError(path.string() + ": truncated index");
  }
  std::vector<BaseIndexEntry> out(count);
  const std::byte* p = bytes.data() + 12;
  for (auto& e : out) {
    e.star_id = load_le<std::int64_t>(p);
    e.first = load_le<std::uint64_t>(p + 8);
    e.count = load_le<std::uint64_t>(p + 16);
    p += kIndexEntryBytes;
  }
  return out;
}

std::vector<StoredRecord> StoreSnapshot::read_base() const {
  if (!base_file_) return {};
  return read_segment_file(*base_file_);
}

std::vector<StoredRecord> StoreSnapshot::read_delta() const {
  std::vector<StoredRecord> out;
  for (const auto& seg : segments_) {
    auto records = read_segment_file(seg.path);
    out.insert(out.end(), records.begin(), records.end());
  }
  return out;
}

std::vector<StoredRecord> StoreSnapshot::read_all() const {
  auto out = read_base();
  auto delta = read_delta();
  out.insert(out.end(), delta.begin(), delta.end());
  return out;
}

std::vector<StoredRecord> StoreSnapshot::query_star(StarId star_id,
                                                    double epoch_lo,
                                                    double epoch_hi) const {
  std::vector<StoredRecord> out;
  if (epoch_hi < epoch_lo) return out;
  auto keep = [&](double epoch) { return epoch >= epoch_lo && epoch <= epoch_hi; };

  if (base_file_ && base_index_) {
    const auto index = read_base_index(*base_index_);
    const auto it = std::lower_bound(
        index.begin(), index.end(), star_id,
        [](const BaseIndexEntry& e, StarId v) { return e.star_id < v; });
    if (it != index.end() && it->star_id == star_id && it->count > 0) {
      const auto bytes =
          read_range(*base_file_, kSegmentHeaderBytes + it->first * kRecordBytes,
                     it->count * kRecordBytes);
      for (std::uint64_t i = 0; i < it->count; ++i) {
        const std::byte* p = bytes.data() + i * kRecordBytes;
        if (keep(load_le<double>(p + kEpochOffset))) {
          out.push_back(decode_record(p));
        }
      }
    }
  }
  for (const auto& seg : segments_) {
    if (!keep(seg.epoch)) continue;
    const auto bytes = read_file(seg.path);
    check_segment(bytes, seg.path);
    const std::size_t n = (bytes.size() - kSegmentHeaderBytes) / kRecordBytes;
    for (std::size_t i = 0; i < n; ++i) {
      const std::byte* p = bytes.data() + kSegmentHeaderBytes + i * kRecordBytes;
      if (load_le<std::int64_t>(p + kStarIdOffset) == star_id) {
        out.push_back(decode_record(p));
      }
    }
  }
  std::sort(out.begin(), out.end(), base_order);
  return out;
}

// --- store ----------------------------------------------------------------

std::vector<StoredRecord> to_stored(const FrameBatch& frame,
                                    const MatchResult& matches) {
  if (matches.per_record.size() != frame.records.size()) {
    throw DomainError("matches", "do not correspond to this frame");
  }
  std::vector<StoredRecord> out(frame.records.size());
  for (std::size_t i = 0; i < frame.records.size(); ++i) {
    const Assignment& a = matches.per_record[i];
    out[i].source = frame.records[i];
    out[i].epoch = frame.epoch;
    out[i].star_id = a.star_id;
    out[i].separation_deg = a.matched() ? a.separation_deg : 0.0;
    out[i].status =
        a.matched() ? RecordStatus::kMatched : RecordStatus::kCandidate;
  }
  return out;
}

std::uint64_t directory_bytes(const fs::path& dir) {
  std::uint64_t total = 0;
  std::error_code ec;
  if (!fs::exists(dir, ec)) return 0;
  for (auto it = fs::recursive_directory_iterator(dir, ec);
       it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) break;
    if (it->is_regular_file(ec)) total += it->file_size(ec);
  }
  return total;
}

fs::path NightStore::partition_dir(const fs::path& root, int partition_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "partition-%02d", partition_id);
  return root / buf;
}

fs::path NightStore::night_dir(std::int64_t night) const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "night-%06" PRId64, night);
  return dir_ / buf;
}

NightStore NightStore::open(const fs::path& root, int partition_id,
                            std::int64_t night_id, StoreOptions options) {
  if (partition_id < 0) throw ConfigError("partition id must be >= 0");
  if (night_id < 0) throw ConfigError("night id must be >= 0");
  NightStore store;
  store.dir_ = partition_dir(root, partition_id);
  store.partition_id_ = partition_id;
  store.night_id_ = night_id;
  store.options_ = options;
  std::error_code ec;
  fs::create_directories(store.dir_, ec);
  if (ec) {
    throw StorageError("create " + store.dir_.string() + ": " + ec.message());
  }
  store.recover();
  return store;
}

void NightStore::read_current() {
  const fs::path current = dir_ / "CURRENT";
  std::error_code ec;
  if (fs::exists(current, ec)) {
    std::ifstream in(current);
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string_view key(line.data(), eq);
      const std::string_view value(line.data() + eq + 1, line.size() - eq - 1);
      if (key == "base_gen") {
        base_gen_ = text::parse<std::uint64_t>(value, "base_gen");
      } else if (key == "base_records") {
        base_records_ = text::parse<std::uint64_t>(value, "base_records");
      } else if (key == "base_last_epoch") {
        base_last_epoch_ = text::parse<double>(value, "base_last_epoch");
      } else if (key == "merged_nights" && !value.empty()) {
        for (auto f : text::split(value)) {
          merged_nights_.push_back(text::parse<std::int64_t>(f, "merged_nights"));
        }
      }
    }
  }
}

void NightStore::recover() {
  PartitionLock lock(dir_);
  read_current();
  std::error_code ec;
  remove_tmp_files(dir_);
  last_epoch_ = base_last_epoch_;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    const fs::path& p = entry.path();
    const std::string name = p.filename().string();
    if (entry.is_regular_file() && name.rfind("base-", 0) == 0 &&
        name != base_name(base_gen_, "tds") &&
        name != base_name(base_gen_, "idx")) {
      fs::remove(p, ec);  // staged or superseded generation
      continue;
    }
    if (!entry.is_directory()) continue;
    const auto night = parse_night_dir(p);
    if (!night) continue;
    if (std::find(merged_nights_.begin(), merged_nights_.end(), *night) !=
        merged_nights_.end()) {
      fs::remove_all(p, ec);  // merge committed, cleanup was interrupted
      continue;
    }
    remove_tmp_files(p);
    for (const auto& seg : list_segments(p, *night)) {
      last_epoch_ = std::max(last_epoch_, seg.epoch);
      if (*night == night_id_) {
        next_seq_ = std::max(next_seq_, seg.seq + 1);
        ++stats_.segments;
        stats_.records_ingested += segment_record_count(seg.path);
      }
    }
  }
  stats_.bytes_on_disk = directory_bytes(dir_);
}

void NightStore::write_current() const {
  std::string body = "tdcat-current 1\n";
  body += "base_gen=" + std::to_string(base_gen_) + "\n";
  body += "base_records=" + std::to_string(base_records_) + "\n";
  body += "base_last_epoch=" + text::format(base_last_epoch_) + "\n";
  body += "merged_nights=";
  for (std::size_t i = 0; i < merged_nights_.size(); ++i) {
    if (i) body += ',';
    body += std::to_string(merged_nights_[i]);
  }
  body += "\n";
  write_file_atomic(dir_ / "CURRENT",
                    std::as_bytes(std::span(body.data(), body.size())),
                    options_.sync);
}

bool NightStore::night_merged() const noexcept {
  return std::find(merged_nights_.begin(), merged_nights_.end(), night_id_) !=
         merged_nights_.end();
}

std::size_t NightStore::delta_segments() const {
  return list_segments(night_dir(night_id_), night_id_).size();
}

AppendAck NightStore::delta_insert(const FrameBatch& frame,
                                   const MatchResult& matches) {
  const auto t0 = clock_type::now();
  PartitionLock lock(dir_);
  if (night_merged()) {
    throw SequencingError("night " + std::to_string(night_id_) +
                          " is already merged");
  }
  if (!(frame.epoch > last_epoch_)) {
    throw SequencingError("epoch " + text::format(frame.epoch) +
                          " does not follow last appended epoch " +
                          text::format(last_epoch_));
  }
  const auto records = to_stored(frame, matches);
  const auto bytes = encode_segment(records);

  const fs::path ndir = night_dir(night_id_);
  std::error_code ec;
  fs::create_directories(ndir, ec);
  if (ec) throw StorageError("create " + ndir.string() + ": " + ec.message());

  std::uint64_t limit = 0;
  if (options_.capacity_bytes > 0) {
    limit = options_.capacity_bytes > stats_.bytes_on_disk
                ? options_.capacity_bytes - stats_.bytes_on_disk
                : 0;
    if (limit == 0) {
      throw StorageError("partition " + std::to_string(partition_id_) +
                         ": " + errno_text(ENOSPC) + " (partition capacity)");
    }
  }
  {
    AtomicWriter writer(ndir / segment_name(next_seq_, frame.epoch),
                        options_.sync, limit);
    writer.write(bytes.data(), bytes.size());
    writer.commit();
  }

  AppendAck ack;
  ack.segment_seq = next_seq_++;
  ack.records = records.size();
  ack.epoch = frame.epoch;
  last_epoch_ = frame.epoch;
  stats_.records_ingested += records.size();
  stats_.segments += 1;
  stats_.bytes_on_disk += bytes.size();
  ack.ingest_latency_s =
      std::chrono::duration<double>(clock_type::now() - t0).count();
  stats_.ingest_latency_s = ack.ingest_latency_s;
  return ack;
}

MergeReport NightStore::nightly_merge(const MergeHook& hook) {
  const auto t0 = clock_type::now();
  PartitionLock lock(dir_);
  MergeReport report;
  report.night_id = night_id_;
  report.base_generation = base_gen_;
  report.base_records = base_records_;

  const fs::path ndir = night_dir(night_id_);
  std::error_code ec;
  if (night_merged()) {
    fs::remove_all(ndir, ec);
    report.noop = true;
    return report;
  }
  const auto segments = list_segments(ndir, night_id_);
  if (segments.empty()) {
    report.noop = true;
    return report;
  }

  // Gather base and delta rows into one buffer and sort keys over it.
  std::vector<std::byte> buffer;
  const fs::path old_base = dir_ / base_name(base_gen_, "tds");
  const fs::path old_index = dir_ / base_name(base_gen_, "idx");
  if (base_gen_ > 0) {
    auto bytes = read_file(old_base);
    buffer.insert(buffer.end(), bytes.begin() + kSegmentHeaderBytes, bytes.end());
  }
  std::size_t merged_records = 0;
  for (const auto& seg : segments) {
    auto bytes = read_file(seg.path);
    check_segment(bytes, seg.path);
    merged_records += (bytes.size() - kSegmentHeaderBytes) / kRecordBytes;
    buffer.insert(buffer.end(), bytes.begin() + kSegmentHeaderBytes, bytes.end());
  }
  const std::size_t total = buffer.size() / kRecordBytes;
  std::vector<MergeKey> keys(total);
  for (std::size_t i = 0; i < total; ++i) {
    const std::byte* p = buffer.data() + i * kRecordBytes;
    keys[i] = {load_le<std::int64_t>(p + kStarIdOffset),
               load_le<double>(p + kEpochOffset), load_le<std::uint64_t>(p),
               i * kRecordBytes};
  }
  std::sort(keys.begin(), keys.end(), [](const MergeKey& a, const MergeKey& b) {
    if (a.star_id != b.star_id) return a.star_id < b.star_id;
    if (a.epoch != b.epoch) return a.epoch < b.epoch;
    if (a.id != b.id) return a.id < b.id;
    return a.offset < b.offset;
  });

  const std::uint64_t new_gen = base_gen_ + 1;
  const fs::path new_base = dir_ / base_name(new_gen, "tds");
  const fs::path new_index = dir_ / base_name(new_gen, "idx");
  std::vector<BaseIndexEntry> index;
  {
    AtomicWriter writer(new_base, options_.sync, 0);
    std::array<std::byte, kSegmentHeaderBytes> header{};
    std::memcpy(header.data(), kSegmentMagic.data(), 4);
    store_le<std::uint64_t>(header.data() + 4, total);
    writer.write(header.data(), header.size());
    std::vector<std::byte> chunk;
    chunk.reserve(4096 * kRecordBytes);
    for (std::size_t i = 0; i < total; ++i) {
      const MergeKey& k = keys[i];
      if (index.empty() || index.back().star_id != k.star_id) {
        index.push_back({k.star_id, i, 0});
      }
      ++index.back().count;
      chunk.insert(chunk.end(), buffer.begin() + static_cast<std::ptrdiff_t>(k.offset),
                   buffer.begin() + static_cast<std::ptrdiff_t>(k.offset + kRecordBytes));
      if (chunk.size() >= 4096 * kRecordBytes) {
        writer.write(chunk.data(), chunk.size());
        chunk.clear();
      }
    }
    writer.write(chunk.data(), chunk.size());
    writer.commit();
  }
  {
    std::vector<std::byte> bytes(12 + index.size() * kIndexEntryBytes);
    std::memcpy(bytes.data(), kIndexMagic.data(), 4);
    store_le<std::uint64_t>(bytes.data() + 4, index.size());
    std::byte* p = bytes.data() + 12;
    for (const auto& e : index) {
      store_le(p, e.star_id);
      store_le(p + 8, e.first);
      store_le(p + 16, e.count);
      p += kIndexEntryBytes;
    }
    write_file_atomic(new_index, bytes, options_.sync);
  }
  if (hook) hook(MergePhase::kStaged);

  // Commit point.
  const std::uint64_t prev_gen = base_gen_;
  const auto prev_nights = merged_nights_;
  const auto prev_records = base_records_;
  const auto prev_last = base_last_epoch_;
  base_gen_ = new_gen;
  merged_nights_.push_back(night_id_);
  std::sort(merged_nights_.begin(), merged_nights_.end());
  base_records_ = total;
  base_last_epoch_ = std::max(base_last_epoch_, segments.back().epoch);
  try {
    write_current();
  } catch (...) {
    base_gen_ = prev_gen;
    merged_nights_ = prev_nights;
    base_records_ = prev_records;
    base_last_epoch_ = prev_last;
    throw;
  }
  if (hook) hook(MergePhase::kCommitted);

  if (prev_gen > 0) {
    fs::remove(old_base, ec);
    fs::remove(old_index, ec);
  }
  fs::remove_all(ndir, ec);

  stats_.merge_duration_s =
      std::chrono::duration<double>(clock_type::now() - t0).count();
  stats_.bytes_on_disk = directory_bytes(dir_);
  report.segments_merged = segments.size();
  report.records_merged = merged_records;
  report.base_records = total;
  report.base_generation = new_gen;
  report.duration_s = stats_.merge_duration_s;
  return report;
}

StoreSnapshot StoreSnapshot::build(const fs::path& dir, int partition_id,
                                   std::uint64_t base_gen,
                                   const std::vector<std::int64_t>& merged) {
  StoreSnapshot snap;
  snap.partition_id_ = partition_id;
  snap.base_gen_ = base_gen;
  if (base_gen > 0) {
    snap.base_file_ = dir / base_name(base_gen, "tds");
    snap.base_index_ = dir / base_name(base_gen, "idx");
  }
  std::vector<std::pair<std::int64_t, fs::path>> nights;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_directory()) continue;
    const auto night = parse_night_dir(entry.path());
    if (!night) continue;
    if (std::find(merged.begin(), merged.end(), *night) != merged.end()) {
      continue;
    }
    nights.emplace_back(*night, entry.path());
  }
  std::sort(nights.begin(), nights.end());
  for (const auto& [night, path] : nights) {
    auto segs = list_segments(path, night);
    snap.segments_.insert(snap.segments_.end(), segs.begin(), segs.end());
  }
  return snap;
}

StoreSnapshot NightStore::snapshot() const {
  return StoreSnapshot::build(dir_, partition_id_, base_gen_, merged_nights_);
}

StoreSnapshot NightStore::read_snapshot(const fs::path& root,
                                        int partition_id) {
  NightStore probe;
  probe.dir_ = partition_dir(root, partition_id);
  probe.partition_id_ = partition_id;
  std::error_code ec;
  if (!fs::is_directory(probe.dir_, ec)) {
    throw StorageError(probe.dir_.string() + ": no such partition");
  }
  probe.read_current();
  return probe.snapshot();
}

StorageStats NightStore::stats() const { return stats_; }

}  // namespace tdcat
