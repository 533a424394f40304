#include "fabsearch/index.hpp"

#include <algorithm>

#include "fabsearch/error.hpp"

namespace fabsearch {

void Repository::add(PartRecord record) {
  const PartId id = record.id();
  if (contains(id)) throw Error(ErrorCode::DuplicateId, "duplicate part id " + format_part_id(id));
  const std::pair<int, int> d{record.signature.n_shells, record.signature.n_freq};
  if (dims_ && *dims_ != d)
    throw Error(ErrorCode::DimensionMismatch, "signature of part " + format_part_id(id) + " is " +
                                                  std::to_string(d.first) + "x" + std::to_string(d.second) +
                                                  ", repository holds " + std::to_string(dims_->first) + "x" +
                                                  std::to_string(dims_->second));
  dims_ = d;
  by_id_.emplace(id, records_.size());
  records_.push_back(std::move(record));
}

const PartRecord* Repository::find(PartId id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

const PartRecord& Repository::get(PartId id) const {
  const PartRecord* r = find(id);
  if (!r) throw Error(ErrorCode::UnknownPart, "unknown part " + format_part_id(id));
  return *r;
}

std::size_t Repository::position(PartId id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw Error(ErrorCode::UnknownPart, "unknown part " + format_part_id(id));
  return it->second;
}

std::vector<Neighbor> knn(const Repository& repo, const SphSignature& query, std::size_t k,
                          const RecordFilter& filter) {
  if (auto d = repo.dims(); d && (d->first != query.n_shells || d->second != query.n_freq))
    throw Error(ErrorCode::DimensionMismatch, "query signature dimensions differ from the repository");

  std::vector<Neighbor> all;
  all.reserve(repo.size());
  for (const PartRecord& r : repo.records()) {
    if (filter && !filter(r)) continue;
    all.push_back({r.id(), distance(query, r.signature)});
  }
  const std::size_t n = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), closer);
  all.resize(n);
  return all;
}

Bytes save_repository(const Repository& repo) {
  ByteWriter out;
  out.tag("FIDX");
  out.put(std::uint16_t{1});
  const auto dims = repo.dims().value_or(std::pair{0, 0});
  out.put(static_cast<std::uint16_t>(dims.first));
  out.put(static_cast<std::uint16_t>(dims.second));
  out.put(static_cast<std::uint32_t>(repo.size()));
  for (const PartRecord& r : repo.records()) {
    out.put(static_cast<std::uint32_t>(r.id()));
    const std::string doc = dump_part_meta(r.meta);
    out.put(static_cast<std::uint32_t>(doc.size()));
    out.raw(doc.data(), doc.size());
    for (double v : r.signature.power) out.put(v);
  }
  return out.take();
}

Repository load_repository(ByteView bytes) {
  ByteReader in(bytes, ErrorCode::CorruptIndex);
  in.expect_tag("FIDX");
  if (in.get<std::uint16_t>() != 1) in.fail("unsupported index version");
  const int shells = in.get<std::uint16_t>();
  const int freqs = in.get<std::uint16_t>();
  const std::uint32_t count = in.get<std::uint32_t>();
  const std::size_t values = static_cast<std::size_t>(shells) * freqs;
  if (count > 0 && values == 0) in.fail("index with records but zero signature dimensions");
  // Each record needs at least its id, length prefix and signature.
  if (static_cast<std::uint64_t>(count) * (8 + values * sizeof(double)) > in.remaining())
    in.fail("declared record count exceeds file length");

  Repository repo;
  for (std::uint32_t i = 0; i < count; ++i) {
    const PartId id = in.get<std::uint32_t>();
    const std::uint32_t len = in.get<std::uint32_t>();
    ByteView doc = in.take(len);
    PartRecord record;
    try {
      record.meta = load_part_meta({reinterpret_cast<const char*>(doc.data()), doc.size()});
    } catch (const Error& e) {
      in.fail("record " + std::to_string(i) + ": " + e.what());
    }
    if (record.meta.part_id != id) in.fail("record id disagrees with its metadata");
    record.signature = SphSignature(shells, freqs);
    for (double& v : record.signature.power) v = in.get<double>();
    try {
      repo.add(std::move(record));
    } catch (const Error& e) {
      in.fail(e.what());
    }
  }
  if (in.remaining() != 0) in.fail("trailing bytes after the last record");
  return repo;
}

void save_repository_file(const Repository& repo, const std::string& path) {
  write_file(path, save_repository(repo));
}

Repository load_repository_file(const std::string& path) { return load_repository(read_file(path)); }

}  // namespace fabsearch
