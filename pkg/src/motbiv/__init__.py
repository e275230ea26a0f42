"""motbiv: exact bivariant and motivic characteristic-class computations."""
