class Animal {
    String sound() {
        return "";
    }
}
class Dog extends Animal {
    String sound() {
        return super.sound() + "woof";
    }
}
class Zoo {
    void feed(Animal a) {
        Animal pet = new Dog();
        Dog d = (Dog) pet;
    }
}
