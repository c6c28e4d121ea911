#pragma once

#include "codesim/algolib.hpp"

namespace codesim::algolib::detail {

using Vec = std::vector<std::int64_t>;

// Sorting routines, called as main(v, len(v)).
Vec insertion_recursive(Vec v);
Vec bubble_recursive(Vec v);
Vec selection_recursive(Vec v);
Vec adaptive_bubble_recursive(Vec v);
Vec quick_recursive(Vec v);
Vec merge_recursive(Vec v);
Vec tim_recursive(Vec v);
Vec heap_recursive(Vec v);
Vec insertion_iterative(Vec v);
Vec bubble_iterative(Vec v);
Vec selection_iterative(Vec v);
Vec adaptive_bubble_iterative(Vec v);
Vec quick_iterative(Vec v);
Vec merge_iterative(Vec v);
Vec tim_iterative(Vec v);
Vec heap_iterative(Vec v);

// Classic routines and their variants.
std::int64_t fibonacci(std::int64_t n);
std::int64_t padovan(std::int64_t n);
Vec bubble_ascending(Vec v);
Vec bubble_descending(Vec v);
std::int64_t gauss_sum(std::int64_t n);
std::int64_t gauss_alternating(std::int64_t n);
std::int64_t is_prime(std::int64_t n);
std::int64_t is_prime_successor(std::int64_t n);
std::int64_t collatz_sum(std::int64_t n);
std::int64_t collatz_even_sum(std::int64_t n);

}  // namespace codesim::algolib::detail
