#include "shardlearn/stream.hpp"

#include "shardlearn/errors.hpp"
#include "shardlearn/parser.hpp"

namespace shardlearn {

bool InstanceReader::next(Instance& out) {
  if (!std::getline(*in_, line_)) {
    if (in_->bad()) throw std::runtime_error("I/O failure while reading input");
    return false;
  }
  ++line_no_;
  try {
    out = parse_instance(line_, next_id_);
  } catch (const ParseError& e) {
    throw ParseError(e.byte_offset,
                     "line " + std::to_string(line_no_) + ": " + e.what());
  }
  ++next_id_;
  return true;
}

bool VectorStream::next(SparseVector& x, double& y) {
  if (pos_ >= data_.size()) return false;
  x = data_[pos_].x;
  y = data_[pos_].y;
  ++pos_;
  return true;
}

FileExampleStream::FileExampleStream(std::string path, InteractionSpec q, unsigned bits)
    : path_(std::move(path)), q_(std::move(q)), bits_(bits) {
  validate(q_);
  reset();
}

void FileExampleStream::reset() {
  file_.close();
  file_.clear();
  file_.open(path_);
  if (!file_) throw ConfigError("cannot open data file: " + path_);
  reader_ = std::make_unique<InstanceReader>(file_);
}

bool FileExampleStream::next(SparseVector& x, double& y) {
  Instance inst;
  if (!reader_->next(inst)) return false;
  x = expand_and_hash(inst, q_, bits_);
  y = inst.label;
  return true;
}

bool IstreamExampleStream::next(SparseVector& x, double& y) {
  started_ = true;
  Instance inst;
  if (!reader_.next(inst)) return false;
  x = expand_and_hash(inst, q_, bits_);
  y = inst.label;
  return true;
}

void IstreamExampleStream::reset() {
  if (started_) throw ConfigError("input stream is not seekable; multiple passes need a file");
}

}  // namespace shardlearn
