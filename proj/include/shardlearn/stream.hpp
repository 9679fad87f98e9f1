#pragma once

#include <fstream>
#include <istream>
#include <memory>
#include <string>

#include "shardlearn/expand.hpp"
#include "shardlearn/instance.hpp"
#include "shardlearn/sparse.hpp"

namespace shardlearn {

// Pulls instances out of a text stream one line at a time; memory stays
// bounded by the longest line. Instances are numbered 1, 2, 3, ... A bad
// line throws ParseError naming the line and byte offset; instances before
// it have already been yielded.
class InstanceReader {
 public:
  explicit InstanceReader(std::istream& in) : in_(&in) {}
  bool next(Instance& out);
  size_t buffer_capacity() const { return line_.capacity(); }

 private:
  std::istream* in_;
  std::string line_;
  uint64_t next_id_ = 1;
  uint64_t line_no_ = 0;
};

// One (hashed features, label) pair at a time; reset() rewinds for the next
// pass. Implementations that cannot rewind throw ConfigError from reset().
class ExampleStream {
 public:
  virtual ~ExampleStream() = default;
  virtual bool next(SparseVector& x, double& y) = 0;
  virtual void reset() = 0;
};

class VectorStream : public ExampleStream {
 public:
  struct Example {
    SparseVector x;
    double y;
  };
  VectorStream() = default;
  explicit VectorStream(std::vector<Example> data) : data_(std::move(data)) {}
  void push(SparseVector x, double y) { data_.push_back({std::move(x), y}); }

  bool next(SparseVector& x, double& y) override;
  void reset() override { pos_ = 0; }
  const std::vector<Example>& data() const { return data_; }

 private:
  std::vector<Example> data_;
  size_t pos_ = 0;
};

class FileExampleStream : public ExampleStream {
 public:
  FileExampleStream(std::string path, InteractionSpec q, unsigned bits);
  bool next(SparseVector& x, double& y) override;
  void reset() override;

 private:
  std::string path_;
  InteractionSpec q_;
  unsigned bits_;
  std::ifstream file_;
  std::unique_ptr<InstanceReader> reader_;
};

// Single forward pass over an already-open istream (e.g. stdin).
class IstreamExampleStream : public ExampleStream {
 public:
  IstreamExampleStream(std::istream& in, InteractionSpec q, unsigned bits)
      : q_(std::move(q)), bits_(bits), reader_(in) {}
  bool next(SparseVector& x, double& y) override;
  void reset() override;

 private:
  InteractionSpec q_;
  unsigned bits_;
  InstanceReader reader_;
  bool started_ = false;
};

}  // namespace shardlearn
