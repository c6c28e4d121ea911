def f(n):
    tot = 0
    for i in range(n):
        tot += i
    return tot
