// Native transliterations of the corpus sources. Each function follows its
// printed source statement by statement, including its quirks; the
// differential tests compare them against std::sort.

#include <algorithm>
#include <utility>

#include "codesim/error.hpp"
#include "oracles.hpp"

namespace codesim::algolib::detail {

namespace {

using std::swap;

std::int64_t len(const Vec& v) { return static_cast<std::int64_t>(v.size()); }

// Python list indexing, including negative indices.
std::int64_t& at(Vec& v, std::int64_t i) {
  if (i < 0) i += len(v);
  if (i < 0 || i >= len(v)) throw Error("list index out of range");
  return v[static_cast<std::size_t>(i)];
}

// Python slice lst[a:b] for non-negative bounds.
Vec slice(const Vec& v, std::int64_t a, std::int64_t b) {
  a = std::clamp<std::int64_t>(a, 0, len(v));
  b = std::clamp<std::int64_t>(b, 0, len(v));
  if (b <= a) return {};
  return Vec(v.begin() + a, v.begin() + b);
}

// ---- recursive sorting -----------------------------------------------------

// The printed recursive Insertion Sort and Selection Sort are the same text.
Vec& selection_rec(Vec& array, std::int64_t size, std::int64_t start) {
  if (start >= len(array) - 1) return array;
  std::int64_t min_index = start;
  for (std::int64_t j = start + 1; j < len(array); ++j)
    if (at(array, j) < at(array, min_index)) min_index = j;
  swap(at(array, start), at(array, min_index));
  return selection_rec(array, size, start + 1);
}

Vec& bubble_rec(Vec& list_data, std::int64_t length) {
  for (std::int64_t i = 0; i < length - 1; ++i)
    if (at(list_data, i) > at(list_data, i + 1)) swap(at(list_data, i), at(list_data, i + 1));
  return length < 2 ? list_data : bubble_rec(list_data, length - 1);
}

Vec& adaptive_bubble_rec(Vec& list_data, std::int64_t length) {
  bool swapped = false;
  for (std::int64_t i = 0; i < length - 1; ++i) {
    if (at(list_data, i) > at(list_data, i + 1)) {
      swap(at(list_data, i), at(list_data, i + 1));
      swapped = true;
    }
  }
  return !swapped ? list_data : adaptive_bubble_rec(list_data, length - 1);
}

std::int64_t lomuto_partition(Vec& array, std::int64_t low, std::int64_t high) {
  const std::int64_t pivot = at(array, high);
  std::int64_t i = low - 1;
  for (std::int64_t j = low; j < high; ++j) {
    if (at(array, j) <= pivot) {
      i = i + 1;
      swap(at(array, i), at(array, j));
    }
  }
  swap(at(array, i + 1), at(array, high));
  return i + 1;
}

Vec& quick_rec(Vec& array, std::int64_t high, std::int64_t low) {
  if (high == len(array)) high = high - 1;
  if (low < high) {
    const std::int64_t pi = lomuto_partition(array, low, high);
    quick_rec(array, pi - 1, low);
    quick_rec(array, high, pi + 1);
  }
  return array;
}

void merge_ranges(Vec& arr, std::int64_t l, std::int64_t m, std::int64_t r) {
  const std::int64_t n1 = m - l + 1;
  const std::int64_t n2 = r - m;
  Vec L(static_cast<std::size_t>(std::max<std::int64_t>(n1, 0)));
  Vec R(static_cast<std::size_t>(std::max<std::int64_t>(n2, 0)));
  for (std::int64_t i = 0; i < n1; ++i) at(L, i) = at(arr, l + i);
  for (std::int64_t j = 0; j < n2; ++j) at(R, j) = at(arr, m + 1 + j);
  std::int64_t i = 0, j = 0, k = l;
  while (i < n1 && j < n2) {
    if (at(L, i) <= at(R, j)) {
      at(arr, k) = at(L, i);
      i += 1;
    } else {
      at(arr, k) = at(R, j);
      j += 1;
    }
    k += 1;
  }
  while (i < n1) {
    at(arr, k) = at(L, i);
    i += 1;
    k += 1;
  }
  while (j < n2) {
    at(arr, k) = at(R, j);
    j += 1;
    k += 1;
  }
}

Vec& merge_rec(Vec& arr, std::int64_t r, std::int64_t l) {
  if (r == len(arr)) r = r - 1;
  if (l < r) {
    const std::int64_t m = l + (r - l) / 2;
    merge_rec(arr, m, l);
    merge_rec(arr, r, m + 1);
    merge_ranges(arr, l, m, r);
  }
  return arr;
}

Vec tim_merge(const Vec& left, const Vec& right) {
  if (left.empty()) return right;
  if (right.empty()) return left;
  Vec out;
  if (left[0] < right[0]) {
    out.push_back(left[0]);
    auto rest = tim_merge(slice(left, 1, len(left)), right);
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
  }
  out.push_back(right[0]);
  auto rest = tim_merge(left, slice(right, 1, len(right)));
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

std::int64_t binary_position(const Vec& lst, std::int64_t item, std::int64_t start, std::int64_t end) {
  if (start == end) return lst.at(static_cast<std::size_t>(start)) > item ? start : start + 1;
  if (start > end) return start;
  const std::int64_t mid = (start + end) / 2;
  const std::int64_t at_mid = lst.at(static_cast<std::size_t>(mid));
  if (at_mid < item) return binary_position(lst, item, mid + 1, end);
  if (at_mid > item) return binary_position(lst, item, start, mid - 1);
  return mid;
}

Vec binary_insertion(Vec lst) {
  const std::int64_t length = len(lst);
  for (std::int64_t index = 1; index < length; ++index) {
    const std::int64_t value = at(lst, index);
    const std::int64_t pos = binary_position(lst, value, 0, index - 1);
    Vec next = slice(lst, 0, pos);
    next.push_back(value);
    auto mid = slice(lst, pos, index);
    auto tail = slice(lst, index + 1, length);
    next.insert(next.end(), mid.begin(), mid.end());
    next.insert(next.end(), tail.begin(), tail.end());
    lst = std::move(next);
  }
  return lst;
}

void heapify_rec(Vec& u_arr, std::int64_t index, std::int64_t heap_size) {
  std::int64_t largest = index;
  const std::int64_t left_index = 2 * index + 1;
  const std::int64_t right_index = 2 * index + 2;
  if (left_index < heap_size && at(u_arr, left_index) > at(u_arr, largest)) largest = left_index;
  if (right_index < heap_size && at(u_arr, right_index) > at(u_arr, largest)) largest = right_index;
  if (largest != index) {
    swap(at(u_arr, largest), at(u_arr, index));
    heapify_rec(u_arr, largest, heap_size);
  }
}

// ---- iterative sorting -----------------------------------------------------

void bubble_iter(Vec& collection) {
  const std::int64_t length = len(collection);
  for (std::int64_t i = length - 1; i >= 0; --i)
    for (std::int64_t j = 0; j < i; ++j)
      if (at(collection, j) > at(collection, j + 1)) swap(at(collection, j), at(collection, j + 1));
}

void insertion_range(Vec& arr, std::int64_t left, std::int64_t right) {
  for (std::int64_t i = left + 1; i < right + 1; ++i) {
    const std::int64_t key_item = at(arr, i);
    std::int64_t j = i - 1;
    while (j >= left && at(arr, j) > key_item) {
      at(arr, j + 1) = at(arr, j);
      j -= 1;
    }
    at(arr, j + 1) = key_item;
  }
}

void tim_merge_ranges(Vec& arr, std::int64_t left, std::int64_t middle, std::int64_t right) {
  if (at(arr, middle) <= at(arr, middle + 1)) return;
  const Vec left_copy = slice(arr, left, middle + 1);
  const Vec right_copy = slice(arr, middle + 1, right + 1);
  std::size_t li = 0, ri = 0;
  std::int64_t s_index = left;
  while (li < left_copy.size() && ri < right_copy.size()) {
    if (left_copy[li] <= right_copy[ri]) {
      at(arr, s_index) = left_copy[li];
      li += 1;
    } else {
      at(arr, s_index) = right_copy[ri];
      ri += 1;
    }
    s_index += 1;
  }
  while (li < left_copy.size()) {
    at(arr, s_index) = left_copy[li];
    li += 1;
    s_index += 1;
  }
  while (ri < right_copy.size()) {
    at(arr, s_index) = right_copy[ri];
    ri += 1;
    s_index += 1;
  }
}

// Python int((i - 1) / 2) truncates toward zero, as does C++ division.
std::int64_t parent(std::int64_t i) { return (i - 1) / 2; }

void build_heap_sift_up(Vec& arr, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) {
    if (at(arr, i) > at(arr, parent(i))) {
      std::int64_t j = i;
      while (at(arr, j) > at(arr, parent(j))) {
        swap(at(arr, j), at(arr, parent(j)));
        j = parent(j);
      }
    }
  }
}

}  // namespace

Vec insertion_recursive(Vec v) {
  const auto n = len(v);
  return selection_rec(v, n, 0);
}

Vec selection_recursive(Vec v) {
  const auto n = len(v);
  return selection_rec(v, n, 0);
}

Vec bubble_recursive(Vec v) {
  const auto n = len(v);
  return bubble_rec(v, n);
}

Vec adaptive_bubble_recursive(Vec v) {
  const auto n = len(v);
  return adaptive_bubble_rec(v, n);
}

Vec quick_recursive(Vec v) {
  const auto n = len(v);
  return quick_rec(v, n, 0);
}

Vec merge_recursive(Vec v) {
  const auto n = len(v);
  return merge_rec(v, n, 0);
}

Vec tim_recursive(Vec lst) {
  const std::int64_t length = len(lst);
  std::vector<Vec> runs, s_runs;
  Vec new_run{at(lst, 0)};
  Vec s_array;
  std::int64_t i = 1;
  while (i < length) {
    if (at(lst, i) < at(lst, i - 1)) {
      runs.push_back(new_run);
      new_run = {at(lst, i)};
    } else {
      new_run.push_back(at(lst, i));
    }
    i += 1;
  }
  runs.push_back(new_run);
  for (const auto& run : runs) s_runs.push_back(binary_insertion(run));
  for (const auto& run : s_runs) s_array = tim_merge(s_array, run);
  return s_array;
}

Vec heap_recursive(Vec u_arr) {
  const std::int64_t n = len(u_arr);
  for (std::int64_t i = n / 2 - 1; i > -1; --i) heapify_rec(u_arr, i, n);
  for (std::int64_t i = n - 1; i > 0; --i) {
    swap(at(u_arr, 0), at(u_arr, i));
    heapify_rec(u_arr, 0, i);
  }
  return u_arr;
}

Vec insertion_iterative(Vec arr) {
  // enumerate(arr[1:]) iterates over a snapshot; rebinding j does not affect it.
  const Vec snapshot = slice(arr, 1, len(arr));
  for (std::int64_t pos = 0; pos < len(snapshot); ++pos) {
    std::int64_t j = pos;
    const std::int64_t val = snapshot[static_cast<std::size_t>(pos)];
    const std::int64_t i = j;
    while (j >= 0 && val < at(arr, j)) {
      at(arr, j + 1) = at(arr, j);
      j -= 1;
    }
    if (j != i) at(arr, j + 1) = val;
  }
  return arr;
}

// The printed iterative Bubble Sort and Selection Sort are the same text.
Vec bubble_iterative(Vec v) {
  bubble_iter(v);
  return v;
}

Vec selection_iterative(Vec v) {
  bubble_iter(v);
  return v;
}

Vec adaptive_bubble_iterative(Vec collection) {
  const std::int64_t length = len(collection);
  for (std::int64_t i = length - 1; i >= 0; --i) {
    bool swapped = false;
    for (std::int64_t j = 0; j < i; ++j) {
      if (at(collection, j) > at(collection, j + 1)) {
        swapped = true;
        swap(at(collection, j), at(collection, j + 1));
      }
    }
    if (!swapped) break;
  }
  return collection;
}

// The printed iterative Quicksort calls a partition helper it does not define;
// the recursive listing's helper of the same name is used.
Vec quick_iterative(Vec arr) {
  std::int64_t h = len(arr);
  std::int64_t l = 0;
  if (h == len(arr)) h = h - 1;
  const std::int64_t size = h - l + 1;
  Vec stack(static_cast<std::size_t>(std::max<std::int64_t>(size, 0)), 0);
  std::int64_t top = -1;
  top = top + 1;
  at(stack, top) = l;
  top = top + 1;
  at(stack, top) = h;
  while (top >= 0) {
    h = at(stack, top);
    top = top - 1;
    l = at(stack, top);
    top = top - 1;
    const std::int64_t p = lomuto_partition(arr, l, h);
    if (p - 1 > l) {
      top = top + 1;
      at(stack, top) = l;
      top = top + 1;
      at(stack, top) = p - 1;
    }
    if (p + 1 < h) {
      top = top + 1;
      at(stack, top) = p + 1;
      top = top + 1;
      at(stack, top) = h;
    }
  }
  return arr;
}

Vec merge_iterative(Vec a) {
  std::int64_t width = 1;
  const std::int64_t n = len(a);
  while (width < n) {
    std::int64_t l = 0;
    while (l < n) {
      const std::int64_t r = std::min(l + (width * 2 - 1), n - 1);
      const std::int64_t m = std::min(l + width - 1, n - 1);
      merge_ranges(a, l, m, r);
      l += width * 2;
    }
    width *= 2;
  }
  return a;
}

Vec tim_iterative(Vec arr) {
  constexpr std::int64_t min_run = 32;
  const std::int64_t n = len(arr);
  for (std::int64_t i = 0; i < n; i += min_run) insertion_range(arr, i, std::min(i + min_run - 1, n - 1));
  std::int64_t size = min_run;
  while (size < n) {
    for (std::int64_t start = 0; start < n; start += size * 2) {
      const std::int64_t middle = std::min(start + size - 1, n - 1);
      const std::int64_t end = std::min(start + size * 2 - 1, n - 1);
      if (middle < end) tim_merge_ranges(arr, start, middle, end);
    }
    size *= 2;
  }
  return arr;
}

Vec heap_iterative(Vec arr) {
  const std::int64_t n = len(arr);
  build_heap_sift_up(arr, n);
  for (std::int64_t i = n - 1; i > 0; --i) {
    swap(at(arr, 0), at(arr, i));
    std::int64_t j = 0, index = 0;
    while (true) {
      index = 2 * j + 1;
      if (index < (i - 1) && at(arr, index) < at(arr, index + 1)) index += 1;
      if (index < i && at(arr, j) < at(arr, index)) swap(at(arr, j), at(arr, index));
      j = index;
      if (index >= i) break;
    }
  }
  return arr;
}

// ---- classic routines ------------------------------------------------------

std::int64_t fibonacci(std::int64_t n) {
  std::int64_t a = 0, b = 1;
  if (n <= 1) return n;
  for (std::int64_t i = 1; i < n; ++i) {
    const std::int64_t c = a + b;
    a = b;
    b = c;
  }
  return b;
}

std::int64_t padovan(std::int64_t n) {
  std::int64_t a = 1, b = 1, c = 1, d = 1;
  for (std::int64_t i = 3; i < n + 1; ++i) {
    d = a + b;
    a = b;
    b = c;
    c = d;
  }
  return d;
}

Vec bubble_ascending(Vec v) {
  const std::int64_t n = len(v);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n - i - 1; ++j)
      if (at(v, j) > at(v, j + 1)) swap(at(v, j), at(v, j + 1));
  return v;
}

Vec bubble_descending(Vec v) {
  const std::int64_t n = len(v);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n - i - 1; ++j)
      if (0 > at(v, j) - at(v, j + 1)) swap(at(v, j), at(v, j + 1));
  return v;
}

std::int64_t gauss_sum(std::int64_t n) {
  std::int64_t tot = 0;
  for (std::int64_t i = 0; i < n; ++i) tot += i;
  return tot;
}

std::int64_t gauss_alternating(std::int64_t n) {
  std::int64_t tot = 0;
  for (std::int64_t i = 0; i < n; ++i) tot += (i % 2 == 0 ? i : -i);
  return tot;
}

std::int64_t is_prime(std::int64_t n) {
  if (n < 2) return 0;
  // range(2, int(n**0.5) + 1)
  for (std::int64_t x = 2; x * x <= n; ++x)
    if (n % x == 0) return 0;
  return 1;
}

std::int64_t is_prime_successor(std::int64_t n) { return is_prime(n + 1); }

std::int64_t collatz_sum(std::int64_t n) {
  if (n < 1) throw Error("collatz routines require n >= 1");
  std::int64_t s = n;
  while (n != 1) {
    if (n % 2 == 0)
      n = n / 2;
    else
      n = 3 * n + 1;
    s += n;
  }
  return s;
}

std::int64_t collatz_even_sum(std::int64_t n) {
  if (n < 1) throw Error("collatz routines require n >= 1");
  std::int64_t s = n;
  while (n != 1) {
    if (n % 2 == 0) {
      n = n / 2;
      s += n;
    } else {
      n = 3 * n + 1;
    }
  }
  return s;
}

}  // namespace codesim::algolib::detail
