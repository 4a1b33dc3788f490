#include "vblob/pagestore.hpp"

#include <fstream>
#include <iterator>

#include "vblob/error.hpp"

namespace vblob {

PageStore::PageStore(PageStoreOptions options) : options_(std::move(options)) {
  if (options_.directory) {
    std::filesystem::create_directories(*options_.directory);
    load_directory();
  }
}

void PageStore::load_directory() {
  for (const auto& entry : std::filesystem::directory_iterator(*options_.directory)) {
    if (!entry.is_regular_file()) continue;
    auto name = entry.path().filename().string();
    if (name.size() != 32) continue;
    PageId pid;
    try {
      pid = PageId::from_hex(name);
    } catch (const Error&) {
      continue;
    }
    std::ifstream in(entry.path(), std::ios::binary);
    Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.empty()) continue;
    usage_.page_count += 1;
    usage_.byte_count += bytes.size();
    pages_.emplace(pid, std::make_shared<const Bytes>(std::move(bytes)));
  }
}

void PageStore::put_page(const PageId& pid, Bytes bytes) {
  if (bytes.empty()) raise(Errc::InvalidArgument, "empty page");
  auto page = std::make_shared<const Bytes>(std::move(bytes));
  std::unique_lock lock(mu_);
  if (auto it = pages_.find(pid); it != pages_.end()) {
    if (*it->second != *page) raise(Errc::Conflict, "page " + pid.hex() + " already stored with other bytes");
    return;
  }
  if (options_.capacity_bytes && usage_.byte_count + page->size() > *options_.capacity_bytes) {
    raise(Errc::StoreFull, "capacity of " + std::to_string(*options_.capacity_bytes) + " bytes exceeded");
  }
  if (options_.directory) {
    auto path = *options_.directory / pid.hex();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(page->data()), static_cast<std::streamsize>(page->size()));
    if (!out) raise(Errc::Internal, "cannot write " + path.string());
  }
  usage_.page_count += 1;
  usage_.byte_count += page->size();
  pages_.emplace(pid, std::move(page));
}

Bytes PageStore::get_page(const PageId& pid, std::uint64_t off, std::uint64_t len) const {
  auto view = view_page(pid, off, len);
  return Bytes(view.bytes.begin(), view.bytes.end());
}

PageStore::PageView PageStore::view_page(const PageId& pid, std::uint64_t off, std::uint64_t len) const {
  std::shared_ptr<const Bytes> page;
  {
    std::shared_lock lock(mu_);
    auto it = pages_.find(pid);
    if (it == pages_.end()) raise(Errc::NotFound, "no page " + pid.hex());
    page = it->second;
  }
  if (off > page->size() || len > page->size() - off) {
    raise(Errc::Range, "extent beyond stored length " + std::to_string(page->size()));
  }
  std::span<const std::uint8_t> bytes(page->data() + off, len);
  return PageView{std::move(page), bytes};
}

PageUsage PageStore::usage() const {
  std::shared_lock lock(mu_);
  return usage_;
}

bool PageStore::contains(const PageId& pid) const {
  std::shared_lock lock(mu_);
  return pages_.contains(pid);
}

}  // namespace vblob
