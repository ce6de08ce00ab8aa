#include "lanercnn/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace lanercnn {

namespace {

constexpr char kMagic[8] = {'L', 'R', 'C', 'N', 'N', 'C', 'K', '1'};

void put_u64(std::string& buf, uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_bytes(std::string& buf, const void* p, size_t n) {
    buf.append(static_cast<const char*>(p), n);
}

class Reader {
public:
    Reader(const std::string& buf) : buf_(buf) {}

    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }

    uint8_t u8() {
        need(1);
        return static_cast<uint8_t>(buf_[pos_++]);
    }

    std::string bytes(size_t n) {
        need(n);
        std::string s = buf_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    void doubles(double* out, size_t n) {
        need(n * sizeof(double));
        std::memcpy(out, buf_.data() + pos_, n * sizeof(double));
        pos_ += n * sizeof(double);
    }

    size_t pos() const { return pos_; }

private:
    void need(size_t n) {
        if (pos_ + n > buf_.size())
            throw ChecksumError("checkpoint truncated");
    }
    const std::string& buf_;
    size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const std::string& config_json,
                     const ParamStore& params) {
    std::string buf;
    put_bytes(buf, kMagic, 8);
    put_u64(buf, config_json.size());
    put_bytes(buf, config_json.data(), config_json.size());
    put_u64(buf, params.count());
    for (size_t i = 0; i < params.count(); ++i) {
        const std::string& name = params.names()[i];
        const ad::Tensor& t = params.tensors()[i];
        put_u64(buf, name.size());
        put_bytes(buf, name.data(), name.size());
        buf.push_back(0);  // dtype f64
        put_u64(buf, t.shape().size());
        for (int64_t d : t.shape()) put_u64(buf, static_cast<uint64_t>(d));
        put_bytes(buf, t.data(), t.values().size() * sizeof(double));
    }
    put_u64(buf, fnv1a64(buf.data(), buf.size()));

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InvalidInputError("cannot open checkpoint for writing: " + path);
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f) throw RuntimeFailure("failed writing checkpoint: " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InvalidInputError("cannot open checkpoint: " + path);
    std::string buf((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());

    if (buf.size() < 16 || std::memcmp(buf.data(), kMagic, 8) != 0)
        throw SchemaError("not a checkpoint file: " + path);
    const uint64_t stored = [&] {
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<uint64_t>(
                     static_cast<unsigned char>(buf[buf.size() - 8 + i]))
                 << (8 * i);
        return v;
    }();
    if (fnv1a64(buf.data(), buf.size() - 8) != stored)
        throw ChecksumError("checkpoint checksum mismatch: " + path);

    Reader r(buf);
    r.bytes(8);  // magic
    Checkpoint ckpt;
    ckpt.config_json = r.bytes(r.u64());
    const uint64_t n = r.u64();
    for (uint64_t i = 0; i < n; ++i) {
        CheckpointEntry e;
        e.name = r.bytes(r.u64());
        if (r.u8() != 0) throw SchemaError("unsupported checkpoint dtype");
        const uint64_t ndim = r.u64();
        for (uint64_t d = 0; d < ndim; ++d)
            e.shape.push_back(static_cast<int64_t>(r.u64()));
        e.data.resize(static_cast<size_t>(ad::numel(e.shape)));
        r.doubles(e.data.data(), e.data.size());
        ckpt.entries.push_back(std::move(e));
    }
    if (r.pos() != buf.size() - 8)
        throw SchemaError("checkpoint has trailing bytes");
    return ckpt;
}

void load_into_store(const Checkpoint& ckpt, ParamStore& params) {
    if (ckpt.entries.size() != params.count())
        throw ConfigMismatchError(
            "checkpoint has " + std::to_string(ckpt.entries.size()) +
            " parameters, model expects " + std::to_string(params.count()));
    for (const auto& e : ckpt.entries) {
        if (!params.contains(e.name))
            throw ConfigMismatchError("checkpoint parameter not in model: " +
                                      e.name);
        ad::Tensor t = params.get(e.name);
        if (t.shape() != e.shape)
            throw ConfigMismatchError("shape mismatch for " + e.name + ": " +
                                      ad::shape_str(e.shape) + " vs " +
                                      ad::shape_str(t.shape()));
        std::copy(e.data.begin(), e.data.end(), t.data());
    }
}

}  // namespace lanercnn
