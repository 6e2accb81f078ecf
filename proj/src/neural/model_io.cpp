#include "wordorder/neural/model_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "wordorder/errors.hpp"
#include "wordorder/neural/bag2seq.hpp"
#include "wordorder/neural/nplm.hpp"
#include "wordorder/neural/rnnlm.hpp"

namespace wo {

namespace {

constexpr char kMagic[4] = {'W', 'O', 'N', 'M'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t arch_tag(const std::string& arch) {
  if (arch == "nplm") return 1;
  if (arch == "rnnlm") return 2;
  if (arch == "bag2seq") return 3;
  throw InternalError("unserializable architecture '" + arch + "'");
}

// Fixed-width little-endian packing, independent of host byte order.
class ByteWriter {
 public:
  void put_u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void put_u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void put_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void put_f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(bits);
  }
  void put_bytes(const void* data, std::size_t n) {
    buf_.append(static_cast<const char*>(data), n);
  }
  void put_string(const std::string& s) {
    put_u32(static_cast<std::uint32_t>(s.size()));
    put_bytes(s.data(), s.size());
  }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(std::string bytes, std::string path) : buf_(std::move(bytes)), path_(std::move(path)) {}

  std::uint8_t get_u8() {
    need(1);
    return static_cast<std::uint8_t>(buf_[pos_++]);
  }
  std::uint32_t get_u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  std::uint64_t get_u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }
  float get_f32() {
    const std::uint32_t bits = get_u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string get_string() {
    const std::uint32_t n = get_u32();
    need(n);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  bool exhausted() const { return pos_ == buf_.size(); }
  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(path_ + ": " + what);
  }

 private:
  void need(std::size_t n) {
    if (buf_.size() - pos_ < n) fail("truncated model container");
  }

  std::string buf_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_model(const NeuralModel& model, const std::string& path) {
  const Vocabulary& vocab = model.vocab();
  ByteWriter w;
  w.put_bytes(kMagic, 4);
  w.put_u32(kVersion);
  w.put_u32(arch_tag(model.arch()));
  w.put_u8(vocab.two_unks() ? 1 : 0);

  const std::vector<std::size_t> dims = model.dims();
  w.put_u32(static_cast<std::uint32_t>(dims.size()));
  for (std::size_t d : dims) w.put_u64(d);

  w.put_u64(vocab.hash());
  w.put_u64(vocab.size());
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    w.put_string(vocab.surface(static_cast<TokenId>(id)));
  }

  const auto& tensors = model.params().tensors();
  w.put_u32(static_cast<std::uint32_t>(tensors.size()));
  for (const Tensor& t : tensors) {
    w.put_string(t.name);
    w.put_u32(static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) w.put_u64(d);
    for (double v : t.value) w.put_f32(static_cast<float>(v));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  out.flush();
  if (!out) throw DataError("failed writing model container '" + path + "'");
}

std::unique_ptr<NeuralModel> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model container '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ByteReader r(std::move(bytes), path);

  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.get_u8());
  if (std::memcmp(magic, kMagic, 4) != 0) r.fail("not a model container (bad magic)");
  const std::uint32_t version = r.get_u32();
  if (version != kVersion) {
    r.fail("unsupported container version " + std::to_string(version));
  }
  const std::uint32_t tag = r.get_u32();
  const bool two_unks = r.get_u8() != 0;

  std::vector<std::size_t> dims(r.get_u32());
  for (std::size_t& d : dims) d = static_cast<std::size_t>(r.get_u64());

  const std::uint64_t stored_hash = r.get_u64();
  const std::uint64_t token_count = r.get_u64();
  std::vector<std::string> surfaces;
  surfaces.reserve(token_count);
  for (std::uint64_t i = 0; i < token_count; ++i) surfaces.push_back(r.get_string());
  Vocabulary vocab = Vocabulary::from_tokens(std::move(surfaces), two_unks);
  if (vocab.hash() != stored_hash) r.fail("vocabulary hash mismatch");
  if (dims.empty() || dims[0] != vocab.size()) {
    r.fail("dimension header disagrees with the stored vocabulary");
  }

  std::unique_ptr<NeuralModel> model;
  switch (tag) {
    case 1:
      if (dims.size() != 4) r.fail("bad dimension count for this architecture");
      model = std::make_unique<NplmModel>(std::move(vocab), dims[1], dims[2], dims[3]);
      break;
    case 2:
      if (dims.size() != 3) r.fail("bad dimension count for this architecture");
      model = std::make_unique<RnnLmModel>(std::move(vocab), dims[1], dims[2]);
      break;
    case 3:
      if (dims.size() != 4) r.fail("bad dimension count for this architecture");
      model = std::make_unique<Bag2SeqModel>(std::move(vocab), dims[1], dims[2], dims[3]);
      break;
    default:
      r.fail("unknown architecture tag " + std::to_string(tag));
  }

  auto& tensors = model->params().tensors();
  const std::uint32_t tensor_count = r.get_u32();
  if (tensor_count != tensors.size()) r.fail("tensor count mismatch");
  for (Tensor& t : tensors) {
    const std::string name = r.get_string();
    if (name != t.name) r.fail("tensor order mismatch: expected '" + t.name + "', found '" + name + "'");
    std::vector<std::size_t> shape(r.get_u32());
    for (std::size_t& d : shape) d = static_cast<std::size_t>(r.get_u64());
    if (shape != t.shape) r.fail("shape mismatch for tensor '" + t.name + "'");
    for (double& v : t.value) v = static_cast<double>(r.get_f32());
  }
  if (!r.exhausted()) r.fail("trailing bytes after model container");
  if (!model->params().values_finite()) r.fail("non-finite parameters in model container");
  return model;
}

}  // namespace wo
