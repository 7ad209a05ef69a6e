#include <stdlib.h>

typedef struct{ int ref;} A; A* gpA;
typedef struct{ A* _pA;} B; B* gpB;

void dec_ref(A* a) { if (--(a->ref) == 0) free(a); }

void clone(B* b1, B* b2){ b1->_pA = b2->_pA; }

void filename_lookup(A* lpA){ dec_ref(lpA); }

void demo_code(){
    A* pA = (A*)malloc(sizeof(A));
    pA->ref = 1;
    gpA = pA;
    B* pB = (B*)malloc(sizeof(B));
    pB->_pA = pA;
    gpB = (B*)malloc(sizeof(B));
    clone(gpB, pB);
    pB->_pA = NULL;
    free(pB);
    filename_lookup(pA);
}

void main(){
    demo_code();
    dec_ref(gpA);
    printf(gpB->_pA->ref);
    free(gpB);
}
