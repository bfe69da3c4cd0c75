#pragma once

#include <set>
#include <string>
#include <vector>

#include "vmil/types.hpp"

namespace vmil {

// Multi-label video annotation: a set of class indices in [0, K).
// The empty set is valid and means "no pathology".
class LabelSet {
public:
    LabelSet() : num_classes_(0) {}

    explicit LabelSet(int num_classes) : num_classes_(num_classes) {
        require(num_classes >= 0, "LabelSet: negative class count");
    }

    LabelSet(int num_classes, std::initializer_list<int> classes) : LabelSet(num_classes) {
        for (int c : classes) insert(c);
    }

    LabelSet(int num_classes, const std::vector<int>& classes) : LabelSet(num_classes) {
        for (int c : classes) insert(c);
    }

    void insert(int c) {
        require(c >= 0 && c < num_classes_, "LabelSet: class index " + std::to_string(c) +
                                                " out of range [0, " + std::to_string(num_classes_) + ")");
        classes_.insert(c);
    }

    bool contains(int c) const { return classes_.count(c) > 0; }
    bool empty() const { return classes_.empty(); }
    std::size_t size() const { return classes_.size(); }
    int num_classes() const { return num_classes_; }
    const std::set<int>& classes() const { return classes_; }

    std::vector<int> sorted() const { return {classes_.begin(), classes_.end()}; }

    // Multi-hot encoding g in {0,1}^K.
    Vector multi_hot() const {
        Vector g = Vector::Zero(num_classes_);
        for (int c : classes_) g[c] = 1.0;
        return g;
    }

    LabelSet& unite(const LabelSet& other) {
        require(num_classes_ == other.num_classes_, "LabelSet: class-count mismatch in union");
        classes_.insert(other.classes_.begin(), other.classes_.end());
        return *this;
    }

    bool operator==(const LabelSet& o) const {
        return num_classes_ == o.num_classes_ && classes_ == o.classes_;
    }
    bool operator!=(const LabelSet& o) const { return !(*this == o); }

private:
    int num_classes_;
    std::set<int> classes_;
};

}  // namespace vmil
