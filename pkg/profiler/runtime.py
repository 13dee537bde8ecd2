"""
C implementation of the logging intrinsics, linked into instrumented seeds
built by a real compiler. Records match profiler.records.
"""

RUNTIME_SOURCE = r'''
#include <stdio.h>
#include <stdlib.h>
#include <stdint.h>

static FILE *ubf_log;

static void ubf_close(void)
{
    if (ubf_log) {
        fclose(ubf_log);
        ubf_log = 0;
    }
}

static void ubf_emit(unsigned char tag, int site, long long a, long long b)
{
    unsigned char rec[21];
    int i;
    if (!ubf_log) {
        const char *path = getenv("UBF_PROFILE_LOG");
        if (!path)
            return;
        ubf_log = fopen(path, "wb");
        if (!ubf_log)
            return;
        atexit(ubf_close);
    }
    rec[0] = tag;
    for (i = 0; i < 4; i++)
        rec[1 + i] = (unsigned char)((unsigned int)site >> (8 * i));
    for (i = 0; i < 8; i++) {
        rec[5 + i] = (unsigned char)((unsigned long long)a >> (8 * i));
        rec[13 + i] = (unsigned char)((unsigned long long)b >> (8 * i));
    }
    fwrite(rec, 1, sizeof rec, ubf_log);
}

long long __ubf_value(int site, int slot, long long value)
{
    ubf_emit(2, site, slot, value);
    return value;
}

long long __ubf_pair(int site, long long x, long long y)
{
    ubf_emit(2, site, 0, x);
    ubf_emit(2, site, 1, y);
    return y;
}

void *__ubf_access(int site, void *addr)
{
    ubf_emit(3, site, (long long)(intptr_t)addr, 0);
    return addr;
}

void __ubf_range(int site, void *base, unsigned long size)
{
    ubf_emit(1, site, (long long)(intptr_t)base, (long long)size);
}

void *__ubf_malloc(int site, unsigned long size)
{
    void *p = malloc(size);
    ubf_emit(1, site, (long long)(intptr_t)p, (long long)size);
    return p;
}

void __ubf_free(int site, void *ptr)
{
    ubf_emit(4, site, (long long)(intptr_t)ptr, 0);
    free(ptr);
}

void __ubf_scope(int site, void *base, int scope)
{
    ubf_emit(5, site, (long long)(intptr_t)base, scope);
}
'''

RUNTIME_NAME = 'ubf_runtime.c'
