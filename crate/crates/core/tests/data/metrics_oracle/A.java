class A { void m(){} }
