#![cfg(doctest)]
