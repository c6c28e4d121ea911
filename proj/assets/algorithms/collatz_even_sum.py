def g(n):
    s = n
    while n != 1:
        if n % 2 == 0:
            n = n // 2
            s += n
        else:
            n = 3 * n + 1
    return s
